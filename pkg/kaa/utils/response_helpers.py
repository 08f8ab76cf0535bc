import json
import sys
from functools import wraps

import numpy as np

from kaa.exceptions import ConfigError, KaaError
from kaa.utils.logger import get_logger, log_error

logger = get_logger('kaa.routes')


def to_jsonable(value):
    """Convert numpy values and models into plain JSON types"""
    if hasattr(value, 'to_dict'):
        return to_jsonable(value.to_dict())
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def api_response(data=None, exit_code=0, stream=None):
    """Write a JSON payload and hand back the exit code"""
    stream = stream or sys.stdout
    stream.write(json.dumps(to_jsonable(data), indent=2, sort_keys=False) + "\n")
    stream.flush()
    return exit_code


def success_response(data=None, exit_code=0):
    """Success payload on stdout"""
    return api_response(data, exit_code=exit_code)


def error_response(message="An error occurred", exit_code=1, data=None):
    """Error envelope on stderr"""
    payload = {"success": False, "message": message, "exit_code": exit_code}
    if data:
        payload["data"] = data
    return api_response(payload, exit_code=exit_code, stream=sys.stderr)


def require_keys(data, required_fields, where=None):
    """Raise ConfigError naming every missing key"""
    if not isinstance(data, dict):
        raise ConfigError(f"Expected a JSON object{' for ' + where if where else ''}")
    missing_fields = [field for field in required_fields if field not in data or data[field] is None]
    if missing_fields:
        prefix = f"{where}: " if where else ""
        raise ConfigError(f"{prefix}Missing required fields: {', '.join(missing_fields)}",
                          missing=missing_fields)
    return data


def handle_service_error(f):
    """Decorator mapping service errors onto exit codes"""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except KaaError as e:
            log_error(logger, f"{f.__name__}: {e.message}", exc_info=False, exit_code=e.exit_code)
            return error_response(e.message, e.exit_code, data=e.to_dict())
        except ValueError as e:
            log_error(logger, f"{f.__name__}: {e}", exc_info=False, exit_code=2)
            return error_response(str(e), 2)
        except Exception as e:
            log_error(logger, f"{f.__name__} failed", exit_code=1)
            return error_response(f"Internal error: {e}", 1)
    return decorated_function
