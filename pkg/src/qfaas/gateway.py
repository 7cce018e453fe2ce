"""REST gateway.

Every route is declared in ROUTE_TABLE with its minimum role, and the app
is built by iterating that table — the documented permission matrix and
the enforced one are the same object.  Handlers are plain synchronous
functions run on the threadpool, so long blocking invocations do not
stall the event loop.
"""

from __future__ import annotations

import argparse
import json
import os
from typing import Any, Callable, Dict, List, Optional, Tuple

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.concurrency import run_in_threadpool
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import __version__
from .auth import Role, User
from .config import PlatformConfig
from .errors import (
    BackendNotFound,
    InvalidToken,
    QfaasError,
    ValidationError,
)
from .platform import Platform

Handler = Callable[[Platform, User, Request, Any], Any]

# (method, path, minimum role, handler name).  Order matters for routing:
# literal segments must precede parameterized ones on the same prefix.
ROUTE_TABLE: List[Tuple[str, str, Role, str]] = [
    ("GET", "/api/users/me", Role.END_USER, "get_me"),
    ("POST", "/api/users", Role.ADMINISTRATOR, "create_user"),
    ("GET", "/api/users", Role.ADMINISTRATOR, "list_users"),
    ("GET", "/api/users/{user_id}", Role.ADMINISTRATOR, "get_user"),
    ("DELETE", "/api/users/{user_id}", Role.ADMINISTRATOR, "delete_user"),
    ("POST", "/api/functions", Role.ENGINEER, "create_function"),
    ("GET", "/api/functions", Role.END_USER, "list_functions"),
    ("GET", "/api/functions/{name}", Role.END_USER, "get_function"),
    ("PUT", "/api/functions/{name}", Role.ENGINEER, "update_function"),
    ("DELETE", "/api/functions/{name}", Role.ENGINEER, "delete_function"),
    ("POST", "/api/functions/{name}/scale", Role.ENGINEER, "scale_function"),
    ("GET", "/api/functions/{name}/logs", Role.ENGINEER, "function_logs"),
    ("GET", "/api/jobs", Role.END_USER, "list_jobs"),
    ("GET", "/api/jobs/{job_id}", Role.END_USER, "get_job"),
    ("DELETE", "/api/jobs/{job_id}", Role.END_USER, "delete_job"),
    ("GET", "/api/providers", Role.END_USER, "list_providers"),
    ("POST", "/api/providers/{name}/credentials", Role.END_USER, "register_credential"),
    ("GET", "/api/credentials", Role.END_USER, "list_credentials"),
    ("GET", "/api/backends", Role.END_USER, "list_backends"),
    ("GET", "/api/backends/{name}", Role.END_USER, "get_backend"),
    ("GET", "/api/system/status", Role.END_USER, "system_status"),
    ("POST", "/function/{name}", Role.END_USER, "invoke_function"),
]


def _bearer_token(request: Request) -> str:
    header = request.headers.get("authorization") or ""
    if header.lower().startswith("bearer "):
        token = header[7:].strip()
        if token:
            return token
    raise InvalidToken("missing bearer token")


def _page(items: List[Any], request: Request) -> Dict[str, Any]:
    """limit/offset plumbing shared by every list endpoint."""
    params = request.query_params

    def _int_param(name: str, default: Optional[int]) -> Optional[int]:
        raw = params.get(name)
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError:
            raise ValidationError(f"{name} must be an integer") from None
        if value < 0:
            raise ValidationError(f"{name} must be >= 0")
        return value

    offset = _int_param("offset", 0)
    limit = _int_param("limit", None)
    window = items[offset:] if limit is None else items[offset : offset + limit]
    return {"items": window, "total": len(items), "offset": offset, "limit": limit}


def _require(body: Any, field: str, kind: type, kind_name: str) -> Any:
    if not isinstance(body, dict):
        raise ValidationError("request body must be a JSON object")
    value = body.get(field)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ValidationError(f"{field!r} must be a {kind_name}")
    return value


# --- handlers --------------------------------------------------------------------

def _h_get_me(platform: Platform, caller: User, request: Request, body: Any):
    return caller.to_doc()


def _h_create_user(platform: Platform, caller: User, request: Request, body: Any):
    username = _require(body, "username", str, "string")
    role_raw = _require(body, "role", str, "string")
    try:
        role = Role(role_raw)
    except ValueError:
        raise ValidationError(
            f"unknown role {role_raw!r}; expected one of "
            f"{sorted(r.value for r in Role)}"
        ) from None
    try:
        user = platform.users.create_user(username, role)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    # The token is shown exactly once, at creation.
    return user.to_doc(with_token=True)


def _h_list_users(platform: Platform, caller: User, request: Request, body: Any):
    return _page([u.to_doc() for u in platform.users.list_users()], request)


def _h_get_user(platform: Platform, caller: User, request: Request, body: Any):
    return platform.users.get_user(request.path_params["user_id"]).to_doc()


def _h_delete_user(platform: Platform, caller: User, request: Request, body: Any):
    user_id = request.path_params["user_id"]
    platform.users.delete_user(user_id)
    return {"deleted": user_id}


def _h_create_function(platform: Platform, caller: User, request: Request, body: Any):
    name = _require(body, "name", str, "string")
    if "source" not in body and "templateSource" not in body:
        raise ValidationError("'source' is required")
    source = body.get("source", body.get("templateSource"))
    if not isinstance(source, str):
        raise ValidationError("'source' must be a string")
    record, _endpoint = platform.functions.create_function(
        caller,
        name,
        source,
        dialect_tag=body.get("dialectTag", body.get("dialect_tag", "qiskit")),
        processors=body.get("processors"),
        config=body.get("config"),
        replicas=body.get("replicas", 1),
    )
    return record


def _h_list_functions(platform: Platform, caller: User, request: Request, body: Any):
    return _page(platform.functions.list_functions(), request)


def _h_get_function(platform: Platform, caller: User, request: Request, body: Any):
    return platform.functions.get_function(request.path_params["name"])


def _h_update_function(platform: Platform, caller: User, request: Request, body: Any):
    if not isinstance(body, dict):
        raise ValidationError("request body must be a JSON object")
    patch = dict(body)
    if "templateSource" in patch:
        patch.setdefault("source", patch.pop("templateSource"))
    if "dialectTag" in patch:
        patch.setdefault("dialect_tag", patch.pop("dialectTag"))
    return platform.functions.update_function(
        caller, request.path_params["name"], patch
    )


def _h_delete_function(platform: Platform, caller: User, request: Request, body: Any):
    return platform.functions.delete_function(caller, request.path_params["name"])


def _h_scale_function(platform: Platform, caller: User, request: Request, body: Any):
    replicas = _require(body, "replicas", int, "integer")
    return platform.functions.scale_function(
        caller, request.path_params["name"], replicas
    )


def _h_function_logs(platform: Platform, caller: User, request: Request, body: Any):
    record = platform.functions.get_function(request.path_params["name"])
    return {
        "name": record["name"],
        "status": record["status"],
        "version": record["version"],
        "build_log": record["build_log"],
    }


def _h_list_jobs(platform: Platform, caller: User, request: Request, body: Any):
    return _page(platform.list_job_docs(caller), request)


def _h_get_job(platform: Platform, caller: User, request: Request, body: Any):
    return platform.get_job_doc(request.path_params["job_id"], caller)


def _h_delete_job(platform: Platform, caller: User, request: Request, body: Any):
    return platform.delete_job(request.path_params["job_id"], caller)


def _h_list_providers(platform: Platform, caller: User, request: Request, body: Any):
    providers = [
        {
            "name": p.name,
            "kind": p.kind.value,
            "backends": sorted(p.backend_names),
            "requires_credential": p.requires_credential,
        }
        for p in sorted(platform.backends.providers.values(), key=lambda p: p.name)
    ]
    return _page(providers, request)


def _h_register_credential(platform: Platform, caller: User, request: Request, body: Any):
    if not isinstance(body, dict):
        raise ValidationError("request body must be a JSON object")
    credential = (
        body.get("credential")
        or body.get("apiToken")
        or body.get("api_token")
        or body.get("token")
    )
    if not isinstance(credential, str) or not credential:
        raise ValidationError("'credential' must be a nonempty string")
    provider = request.path_params["name"]
    try:
        platform.users.register_credential(
            caller, provider, credential, set(platform.backends.providers)
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    return {"provider": provider, "registered": True}


def _h_list_credentials(platform: Platform, caller: User, request: Request, body: Any):
    return {"providers": platform.users.list_credentials(caller)}


def _h_list_backends(platform: Platform, caller: User, request: Request, body: Any):
    docs = [
        platform.backends.backends[name].to_doc()
        for name in sorted(platform.backends.backends)
    ]
    return _page(docs, request)


def _h_get_backend(platform: Platform, caller: User, request: Request, body: Any):
    name = request.path_params["name"]
    backend = platform.backends.backends.get(name)
    if backend is None:
        raise BackendNotFound(f"no backend named {name!r}")
    return backend.to_doc()


def _h_system_status(platform: Platform, caller: User, request: Request, body: Any):
    return platform.system_status()


def _h_invoke_function(platform: Platform, caller: User, request: Request, body: Any):
    return platform.engine.invoke(caller, request.path_params["name"], body or {})


_HANDLERS: Dict[str, Handler] = {
    "get_me": _h_get_me,
    "create_user": _h_create_user,
    "list_users": _h_list_users,
    "get_user": _h_get_user,
    "delete_user": _h_delete_user,
    "create_function": _h_create_function,
    "list_functions": _h_list_functions,
    "get_function": _h_get_function,
    "update_function": _h_update_function,
    "delete_function": _h_delete_function,
    "scale_function": _h_scale_function,
    "function_logs": _h_function_logs,
    "list_jobs": _h_list_jobs,
    "get_job": _h_get_job,
    "delete_job": _h_delete_job,
    "list_providers": _h_list_providers,
    "register_credential": _h_register_credential,
    "list_credentials": _h_list_credentials,
    "list_backends": _h_list_backends,
    "get_backend": _h_get_backend,
    "system_status": _h_system_status,
    "invoke_function": _h_invoke_function,
}


def _make_endpoint(platform: Platform, min_role: Role, handler: Handler):
    async def endpoint(request: Request) -> JSONResponse:
        token = _bearer_token(request)
        caller = platform.users.dependency_check(token, min_role)
        body: Any = None
        raw = await request.body()
        if raw:
            try:
                body = json.loads(raw)
            except ValueError:
                raise ValidationError("request body is not valid JSON") from None
        result = await run_in_threadpool(handler, platform, caller, request, body)
        return JSONResponse(result)

    return endpoint


def create_app(platform: Platform) -> FastAPI:
    app = FastAPI(
        title="qfaas",
        version=__version__,
        openapi_url="/api/openapi.json",
        docs_url="/api/docs",
        redoc_url=None,
    )
    app.state.platform = platform

    @app.exception_handler(QfaasError)
    async def _qfaas_error(request: Request, exc: QfaasError) -> JSONResponse:
        return JSONResponse(status_code=exc.http_status, content=exc.to_body())

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException) -> JSONResponse:
        code = {404: "NotFound", 405: "MethodNotAllowed"}.get(exc.status_code, "HTTPError")
        return JSONResponse(
            status_code=exc.status_code,
            content={"code": code, "message": str(exc.detail), "detail": {}},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={
                "code": "ValidationError",
                "message": "invalid request",
                "detail": {"errors": exc.errors()},
            },
        )

    @app.get("/", include_in_schema=False)
    async def _banner() -> Dict[str, str]:
        return {"service": "qfaas", "version": __version__, "api": "/api", "ui": "/ui"}

    for method, path, min_role, handler_name in ROUTE_TABLE:
        app.add_api_route(
            path,
            _make_endpoint(platform, min_role, _HANDLERS[handler_name]),
            methods=[method],
            name=handler_name,
        )

    ui_dir = platform.config.ui_dir
    if ui_dir is not None and os.path.isdir(ui_dir):
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def main(argv: Optional[List[str]] = None) -> None:
    import uvicorn

    parser = argparse.ArgumentParser(prog="qfaas-gateway", description="Run the platform gateway.")
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--data", help="data directory override")
    parser.add_argument("--addr", help="listen address host:port override")
    args = parser.parse_args(argv)

    overrides: Dict[str, Any] = {}
    if args.data:
        overrides["data_dir"] = args.data
    if args.addr:
        overrides["addr"] = args.addr
    config = PlatformConfig.load(args.config, env=os.environ, **overrides)
    platform = Platform(config)
    if platform.admin_created and config.admin_token is None:
        # First boot with no configured token: show the minted one once.
        print(
            f"created administrator {platform.admin.username!r} "
            f"with token {platform.admin.token}",
            flush=True,
        )
    app = create_app(platform)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    finally:
        platform.close()


if __name__ == "__main__":
    main()
