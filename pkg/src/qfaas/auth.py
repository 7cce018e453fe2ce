"""Users, roles, bearer tokens, and provider credentials.

Static bearer tokens are issued at user creation (128 bits of entropy)
and stand in for a full OAuth2 flow.  Role checks follow the strict
ordering administrator > engineer > end_user.
"""

from __future__ import annotations

import enum
import secrets
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Dict, List, Optional

from .errors import InvalidToken, NotFound, PermissionDenied, ProviderNotFound
from .store import DocumentStore

USERS = "users"
CREDENTIALS = "credentials"


class Role(str, enum.Enum):
    ADMINISTRATOR = "administrator"
    ENGINEER = "engineer"
    END_USER = "end_user"


_RANK = {Role.END_USER: 1, Role.ENGINEER: 2, Role.ADMINISTRATOR: 3}


def role_at_least(role: Role, required: Role) -> bool:
    return _RANK[role] >= _RANK[required]


@dataclass(frozen=True)
class User:
    id: str
    username: str
    role: Role
    token: str
    created_at: str

    @property
    def is_admin(self) -> bool:
        return self.role is Role.ADMINISTRATOR

    def to_doc(self, with_token: bool = False) -> Dict[str, str]:
        doc = {
            "id": self.id,
            "username": self.username,
            "role": self.role.value,
            "created_at": self.created_at,
        }
        if with_token:
            doc["token"] = self.token
        return doc


class UserRegistry:
    """Store-backed user and credential registry with an in-process cache."""

    def __init__(self, store: DocumentStore):
        self._store = store
        self._lock = threading.Lock()
        self._by_token: Dict[str, User] = {}
        self._by_id: Dict[str, User] = {}
        for doc in store.query(USERS):
            user = self._from_body(doc.body)
            self._by_token[user.token] = user
            self._by_id[user.id] = user

    @staticmethod
    def _from_body(body: Dict[str, str]) -> User:
        return User(
            id=body["id"],
            username=body["username"],
            role=Role(body["role"]),
            token=body["token"],
            created_at=body["created_at"],
        )

    def create_user(
        self,
        username: str,
        role: Role,
        token: Optional[str] = None,
    ) -> User:
        if not username:
            raise ValueError("username must be nonempty")
        with self._lock:
            if any(u.username == username for u in self._by_id.values()):
                raise ValueError(f"username {username!r} already exists")
            user = User(
                id=uuid.uuid4().hex,
                username=username,
                role=Role(role),
                token=token or secrets.token_hex(16),
                created_at=datetime.now(timezone.utc).isoformat(
                    sep=" ", timespec="microseconds"
                ),
            )
            self._store.put(USERS, user.id, user.to_doc(with_token=True))
            self._by_token[user.token] = user
            self._by_id[user.id] = user
            return user

    def delete_user(self, user_id: str) -> None:
        with self._lock:
            user = self._by_id.pop(user_id, None)
            if user is None:
                raise NotFound(f"no user {user_id!r}")
            self._by_token.pop(user.token, None)
            self._store.delete(USERS, user_id)

    def get_user(self, user_id: str) -> User:
        with self._lock:
            user = self._by_id.get(user_id)
        if user is None:
            raise NotFound(f"no user {user_id!r}")
        return user

    def list_users(self) -> List[User]:
        with self._lock:
            return sorted(self._by_id.values(), key=lambda u: u.username)

    def dependency_check(self, token: Optional[str], required_role: Role) -> User:
        """Resolve a bearer token and verify role sufficiency."""
        if not token:
            raise InvalidToken("missing bearer token")
        with self._lock:
            user = self._by_token.get(token)
        if user is None:
            raise InvalidToken("unrecognized bearer token")
        if not role_at_least(user.role, required_role):
            raise PermissionDenied(
                f"requires role {required_role.value}, caller is {user.role.value}"
            )
        return user

    # -- provider credentials: scoped to their owner by construction --

    def register_credential(
        self, owner: User, provider_name: str, credential: str, known_providers
    ) -> None:
        if provider_name not in known_providers:
            raise ProviderNotFound(f"unknown provider {provider_name!r}")
        if not credential:
            raise ValueError("credential must be nonempty")
        self._store.put(
            CREDENTIALS,
            f"{owner.id}:{provider_name}",
            {"owner": owner.id, "provider": provider_name, "credential": credential},
        )

    def get_credential(self, owner: User, provider_name: str) -> Optional[str]:
        try:
            doc = self._store.get(CREDENTIALS, f"{owner.id}:{provider_name}")
        except NotFound:
            return None
        return doc.body["credential"]

    def list_credentials(self, owner: User) -> List[str]:
        """Provider names the owner registered; never other users' secrets."""
        docs = self._store.query(CREDENTIALS, {"owner": owner.id})
        return sorted(d.body["provider"] for d in docs)
