import logging

import numpy as np

from sub_nyquist_radar_lib.utils.logger import LoggerFactory
from sub_nyquist_radar_lib.utils.util import DirectoryFactory, EXEC_DATE_STR, derive_seed, make_rng


def test_derive_seed_streams():
    assert derive_seed(7, 1, 2) == derive_seed(7, 1, 2)
    assert derive_seed(7, 1, 2) != derive_seed(7, 2, 1)
    assert derive_seed(7, 1, 2) != derive_seed(8, 1, 2)
    assert 0 <= derive_seed(2**64 - 1, 3) < 2**64
    np.testing.assert_array_equal(make_rng(5, 0).uniform(size=4), make_rng(5, 0).uniform(size=4))


def test_directory_resolution(monkeypatch, tmp_path):
    monkeypatch.delenv("GESEDD_DIR_DATA", raising=False)
    monkeypatch.setenv("GESEDD_DIR_OUTPUT", str(tmp_path))
    assert DirectoryFactory.resolve(DirectoryFactory.DirectoryName.DATA) == tmp_path / EXEC_DATE_STR / "data"
    monkeypatch.setenv("GESEDD_DIR_DATA", str(tmp_path / "pinned"))
    assert DirectoryFactory.resolve(DirectoryFactory.DirectoryName.DATA) == tmp_path / "pinned" / EXEC_DATE_STR
    assert DirectoryFactory.get_env_from_directory_name(DirectoryFactory.DirectoryName.LOG) == "GESEDD_DIR_LOG"


def test_logger_is_cached_and_writes_a_file():
    logger = LoggerFactory.get_logger("sub_nyquist_radar_lib.tests.utils")
    assert LoggerFactory.get_logger("sub_nyquist_radar_lib.tests.utils") is logger
    assert len(logger.handlers) == 2
    log_dir = DirectoryFactory.get_directory(DirectoryFactory.DirectoryName.LOG)
    assert (log_dir / "tests.utils.log").exists()


def test_console_level_from_environment(monkeypatch):
    monkeypatch.setenv("GESEDD_LOG_LEVEL", "warning")
    assert LoggerFactory.console_level() == logging.WARNING
    monkeypatch.setenv("GESEDD_LOG_LEVEL", "chatty")
    assert LoggerFactory.console_level() == logging.INFO
