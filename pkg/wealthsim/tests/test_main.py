import sys
import os
import logging
import pytest
from unittest.mock import patch, MagicMock

project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if project_root not in sys.path:
    sys.path.insert(0, project_root)
app_dir = os.path.join(project_root, 'app')
if app_dir not in sys.path:
    sys.path.insert(0, app_dir)


def test_main_calls_cli_controller_run(monkeypatch):
    # Patch CLIController to avoid running real logic
    from app import main as main_mod

    fake_controller = MagicMock()
    fake_controller.run.return_value = 0
    monkeypatch.setenv('LOG_LEVEL', '0')
    with patch.object(main_mod, 'CLIController', return_value=fake_controller):
        with pytest.raises(SystemExit) as exc_info:
            main_mod.main()

    fake_controller.run.assert_called_once()
    assert exc_info.value.code == 0


def test_main_propagates_exit_code(monkeypatch):
    from app import main as main_mod

    fake_controller = MagicMock()
    fake_controller.run.return_value = 2
    monkeypatch.setenv('LOG_LEVEL', '0')
    with patch.object(main_mod, 'CLIController', return_value=fake_controller):
        with pytest.raises(SystemExit) as exc_info:
            main_mod.main()
    assert exc_info.value.code == 2


@pytest.mark.parametrize("value,expected", [
    ("0", logging.CRITICAL + 10),
    ("1", logging.INFO),
    ("2", logging.DEBUG),
    ("verbose", logging.CRITICAL + 10),
])
def test_log_level_from_env(monkeypatch, value, expected):
    from app import main as main_mod

    monkeypatch.setenv('LOG_LEVEL', value)
    root = logging.getLogger()
    previous = root.level
    try:
        main_mod._configure_logging_from_env()
        assert root.level == expected
        assert logging.getLogger('numba').level >= logging.WARNING
    finally:
        root.setLevel(previous)
