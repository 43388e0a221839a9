from __future__ import annotations

import logging
import os
from typing import Optional

LOG_LEVEL_ENV = 'PSI_APPROX_LOG_LEVEL'


class Logger:
    """This class ensures that there is only one logger instance"""

    _instance: Optional['Logger'] = None

    def __new__(cls) -> 'Logger':
        """Override the __new__ method to ensure only one instance of the Logger class"""
        if not cls._instance:
            cls._instance = super().__new__(cls)
            cls._instance.setup_logger()
        return cls._instance

    def setup_logger(self) -> None:
        """Configure the package logger from the environment and add a console handler"""
        self.logger = logging.getLogger('psi_approx')
        level = os.environ.get(LOG_LEVEL_ENV, 'WARNING').upper()
        self.logger.setLevel(getattr(logging, level, logging.WARNING))
        self.logger.propagate = False
        if not self.logger.handlers:
            self.add_console_handler()

    def add_console_handler(self) -> None:
        """Adds a console handler with the package's formatter."""
        console_handler = logging.StreamHandler()
        console_handler.setLevel(logging.DEBUG)
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%d/%m/%Y %I:%M:%S%p',
        )
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

    def set_level(self, level: str) -> None:
        self.logger.setLevel(getattr(logging, level.upper(), logging.WARNING))

    def get_logger(self) -> logging.Logger:
        return self.logger


logger = Logger().get_logger()
