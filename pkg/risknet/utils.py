import os
from pathlib import Path

from pydantic import BaseModel, ValidationError

from risknet.exceptions import ConfigException
from risknet.logger import logger

ENV_PREFIX = 'RISKNET_'


class EnvSettings(BaseModel):
    """Settings taken from RISKNET_* variables, without the prefix and lower-cased."""
    cache_dir: Path | None = None


def read_env_file(env_file: str | Path | None, /) -> dict[str, str]:
    """
    RISKNET_* assignments of a .env file, keyed without the prefix.
    Lines may start with `export`; values may be quoted; empty values are skipped.
    """
    if env_file is None or not Path(env_file).is_file():
        logger.debug(f'"{env_file}" is not a file, no .env settings read')
        return {}

    variables = {}
    for number, line in enumerate(Path(env_file).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        line = line.removeprefix('export ').lstrip()
        key, separator, value = line.partition('=')
        if not separator:
            logger.warning(f'{env_file}:{number} is not a KEY=value line, skipped')
            continue
        key = key.strip()
        if not key.startswith(ENV_PREFIX):
            continue
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in '"\'':
            value = value[1:-1]
        if value:
            variables[key.removeprefix(ENV_PREFIX).lower()] = value
    return variables


def env_settings(env_file: str | Path | None = None) -> EnvSettings:
    """The .env file first, the process environment on top of it."""
    values = read_env_file(env_file)
    values.update({
        key.removeprefix(ENV_PREFIX).lower(): value
        for key, value in os.environ.items() if key.startswith(ENV_PREFIX) and value
    })
    known = {key: value for key, value in values.items() if key in EnvSettings.__fields__}
    try:
        return EnvSettings(**known)
    except ValidationError as validation_error:
        error = {f'{ENV_PREFIX}{e["loc"][0]}'.upper(): e['msg'] for e in validation_error.errors()}
        raise ConfigException(detail=error)


def resolve_cache_dir(env_file: str | Path | None = None) -> Path | None:
    return env_settings(env_file).cache_dir
