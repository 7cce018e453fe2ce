import pytest

from qfaas import Platform, PlatformConfig, Role


@pytest.fixture
def platform(tmp_path):
    config = PlatformConfig(data_dir=tmp_path / "data", cold_start_millis=0)
    p = Platform(config)
    yield p
    p.close()


@pytest.fixture
def admin(platform):
    return platform.admin


@pytest.fixture
def engineer(platform):
    return platform.users.create_user("eng", Role.ENGINEER)


@pytest.fixture
def end_user(platform):
    return platform.users.create_user("enduser", Role.END_USER)


def deploy_builtin(platform, caller, name, template, post=None, **config):
    processors = {"post": post} if post else None
    config = {"template": template, **config}
    record, endpoint = platform.functions.create_function(
        caller, name, "qir 1;\n", processors=processors, config=config
    )
    assert record["status"] == "DEPLOYED"
    return record, endpoint


@pytest.fixture
def deployed_qrng(platform, engineer):
    record, _ = deploy_builtin(platform, engineer, "rng", "qrng")
    return record
