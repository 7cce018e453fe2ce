import pytest

from qfaas.auth import Role, UserRegistry, role_at_least
from qfaas.errors import InvalidToken, NotFound, PermissionDenied, ProviderNotFound
from qfaas.store import DocumentStore

PROVIDERS = ("internal", "ibmq", "braket", "rigetti")


@pytest.fixture
def registry(tmp_path):
    return UserRegistry(DocumentStore(tmp_path))


def test_token_entropy_and_uniqueness(registry):
    users = [registry.create_user(f"user{i}", Role.END_USER) for i in range(20)]
    tokens = {u.token for u in users}
    assert len(tokens) == 20
    for token in tokens:
        assert len(token) == 32  # 128 bits, hex
        int(token, 16)


def test_role_ladder_is_strict():
    assert role_at_least(Role.ADMINISTRATOR, Role.END_USER)
    assert role_at_least(Role.ADMINISTRATOR, Role.ENGINEER)
    assert role_at_least(Role.ENGINEER, Role.END_USER)
    assert not role_at_least(Role.ENGINEER, Role.ADMINISTRATOR)
    assert not role_at_least(Role.END_USER, Role.ENGINEER)
    assert role_at_least(Role.END_USER, Role.END_USER)


def test_dependency_check(registry):
    user = registry.create_user("eng", Role.ENGINEER)
    assert registry.dependency_check(user.token, Role.END_USER) == user
    assert registry.dependency_check(user.token, Role.ENGINEER) == user
    with pytest.raises(PermissionDenied):
        registry.dependency_check(user.token, Role.ADMINISTRATOR)
    with pytest.raises(InvalidToken):
        registry.dependency_check(None, Role.END_USER)
    with pytest.raises(InvalidToken):
        registry.dependency_check("bogus", Role.END_USER)


def test_duplicate_username_rejected(registry):
    registry.create_user("alice", Role.END_USER)
    with pytest.raises(ValueError):
        registry.create_user("alice", Role.ENGINEER)
    with pytest.raises(ValueError):
        registry.create_user("", Role.END_USER)


def test_delete_user_revokes_token(registry):
    user = registry.create_user("temp", Role.END_USER)
    registry.delete_user(user.id)
    with pytest.raises(InvalidToken):
        registry.dependency_check(user.token, Role.END_USER)
    with pytest.raises(NotFound):
        registry.get_user(user.id)
    with pytest.raises(NotFound):
        registry.delete_user(user.id)


def test_users_survive_restart(tmp_path):
    first = UserRegistry(DocumentStore(tmp_path))
    user = first.create_user("durable", Role.ENGINEER)
    second = UserRegistry(DocumentStore(tmp_path))
    resolved = second.dependency_check(user.token, Role.ENGINEER)
    assert resolved.id == user.id
    assert resolved.role is Role.ENGINEER


def test_to_doc_hides_token_by_default(registry):
    user = registry.create_user("quiet", Role.END_USER)
    assert "token" not in user.to_doc()
    assert user.to_doc(with_token=True)["token"] == user.token


def test_credentials_scoped_to_owner(registry):
    alice = registry.create_user("alice", Role.END_USER)
    bob = registry.create_user("bob", Role.END_USER)
    registry.register_credential(alice, "ibmq", "alice-ibm-token", PROVIDERS)
    registry.register_credential(alice, "braket", "alice-aws-token", PROVIDERS)
    registry.register_credential(bob, "ibmq", "bob-ibm-token", PROVIDERS)

    assert registry.get_credential(alice, "ibmq") == "alice-ibm-token"
    assert registry.get_credential(bob, "ibmq") == "bob-ibm-token"
    assert registry.get_credential(bob, "braket") is None
    assert registry.list_credentials(alice) == ["braket", "ibmq"]
    assert registry.list_credentials(bob) == ["ibmq"]


def test_credential_validation(registry):
    alice = registry.create_user("alice", Role.END_USER)
    with pytest.raises(ProviderNotFound):
        registry.register_credential(alice, "nope", "tok", PROVIDERS)
    with pytest.raises(ValueError):
        registry.register_credential(alice, "ibmq", "", PROVIDERS)


def test_credential_overwrite(registry):
    alice = registry.create_user("alice", Role.END_USER)
    registry.register_credential(alice, "ibmq", "old", PROVIDERS)
    registry.register_credential(alice, "ibmq", "new", PROVIDERS)
    assert registry.get_credential(alice, "ibmq") == "new"
    assert registry.list_credentials(alice) == ["ibmq"]


def test_list_users_sorted(registry):
    for name in ("zeta", "alpha", "mid"):
        registry.create_user(name, Role.END_USER)
    assert [u.username for u in registry.list_users()] == ["alpha", "mid", "zeta"]
