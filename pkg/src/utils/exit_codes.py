"""Standard exit codes for the simulator CLI.

Example:
    >>> from src.utils.exit_codes import EXIT_SUCCESS, log_exit
    >>> import logging
    >>> logger = logging.getLogger(__name__)
    >>> log_exit(logger, EXIT_SUCCESS, "Sweep completed")
"""

import logging

EXIT_SUCCESS = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2

EXIT_CODE_NAMES: dict[int, str] = {
    EXIT_SUCCESS: "SUCCESS",
    EXIT_CONFIG_ERROR: "CONFIG_ERROR",
    EXIT_RUNTIME_ERROR: "RUNTIME_ERROR",
}

EXIT_CODE_DESCRIPTIONS: dict[int, str] = {
    EXIT_SUCCESS: "Successful execution",
    EXIT_CONFIG_ERROR: "Configuration error (bad experiment file, flag or config.toml)",
    EXIT_RUNTIME_ERROR: "Runtime error (simulation failure, unwritable output)",
}

# Keyed by class name; subclasses resolve through their MRO.
ERROR_EXIT_CODES: dict[str, int] = {
    "ConfigError": EXIT_CONFIG_ERROR,
    "SimulationError": EXIT_RUNTIME_ERROR,
    "PhyError": EXIT_RUNTIME_ERROR,
    "StorageIOError": EXIT_RUNTIME_ERROR,
    "InvalidDataError": EXIT_RUNTIME_ERROR,
    "TemplateNotFoundError": EXIT_RUNTIME_ERROR,
    "TemplateRenderError": EXIT_RUNTIME_ERROR,
}


def get_exit_code_name(code: int) -> str:
    """Return readable name for exit code, "UNKNOWN(<code>)" if unmapped."""
    return EXIT_CODE_NAMES.get(code, f"UNKNOWN({code})")


def get_exit_code_description(code: int) -> str:
    """Return description for exit code, "Unknown exit code: <code>" if unmapped."""
    return EXIT_CODE_DESCRIPTIONS.get(code, f"Unknown exit code: {code}")


def exit_code_for(error: BaseException) -> int:
    """Exit code for an exception raised by the simulator.

    Errors the simulator does not know about count as runtime errors.

    Example:
        >>> from src.config import ConfigError
        >>> exit_code_for(ConfigError("snr: step must be > 0"))
        1
    """
    for cls in type(error).__mro__:
        code = ERROR_EXIT_CODES.get(cls.__name__)
        if code is not None:
            return code
    return EXIT_RUNTIME_ERROR


def log_exit(logger: logging.Logger, code: int, message: str | None = None) -> None:
    """Log exit code with optional message.

    SUCCESS goes to logger.info(), every other code to logger.error().
    """
    log_message = f"[{get_exit_code_name(code)}] {get_exit_code_description(code)}"
    if message:
        log_message = f"{log_message}: {message}"

    if code == EXIT_SUCCESS:
        logger.info(log_message)
    else:
        logger.error(log_message)
