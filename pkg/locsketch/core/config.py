"""
Python module to read the parameters specified in the configuration files.
"""
from __future__ import annotations

import ast
import logging
import os
from configparser import ConfigParser
from typing import Any

from locsketch.core.exc import ValidationError

logger = logging.getLogger(__name__)

ENV_PREFIX = "LS_"


def read_config(filename: str, section: str) -> dict[str, Any]:
    """Read a section from a .ini file and return a dictionary with the parameters.

    Values are parsed with ast.literal_eval, so the file holds Python literals
    (numbers, None, tuples, lists, quoted strings). Any value can be overridden by an
    environment variable named LS_<PARAMETER>, e.g. LS_MAX_ROUNDS=20.
    """
    if not os.path.isfile(filename):
        raise FileNotFoundError(f"File {filename} does not exist")

    parser = ConfigParser()
    parser.read(filename, encoding="utf-8-sig")

    if not parser.has_section(section):
        raise ValidationError(f"Section {section} not found in the {filename} file")

    conf_dict = {}
    for key, raw_value in parser.items(section):
        try:
            conf_dict[key] = ast.literal_eval(raw_value)
        except (ValueError, SyntaxError) as e:
            logger.error("Error while parsing '%s' in %s: %s", key, filename, e)
            raise ValidationError(f"Cannot parse '{key}' in {filename}") from e

    for key in conf_dict.keys():
        env_var = f"{ENV_PREFIX}{key}".upper()
        if env_var in os.environ:
            try:
                conf_dict[key] = ast.literal_eval(os.environ[env_var])
            except (ValueError, SyntaxError) as e:
                logger.error("Error while parsing environment variable %s", env_var)
                raise ValidationError(f"Cannot parse {env_var}") from e
    return conf_dict
