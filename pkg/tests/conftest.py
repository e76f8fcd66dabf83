# tests/conftest.py
import pytest


@pytest.fixture(scope="session", autouse=True)
def isolate_app_dir(tmp_path_factory):
    """Redirect ~/.bethe_forge to a session-isolated temporary directory.

    Exports written without --out and the default config file lookup both
    land here, so no test reads or writes the real home directory.
    """
    from bethe_forge import paths

    tmp_dir = tmp_path_factory.mktemp("bethe_forge_home")

    # Hot-swap the module's targets
    paths.APP_DIR = tmp_dir
    paths.CONFIG_FILE = tmp_dir / "config.ini"

    yield


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    monkeypatch.setenv("BETHE_FORGE_THREADS", "1")
