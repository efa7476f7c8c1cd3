from dotenv import load_dotenv
import os


load_dotenv()


def _positive_int(value: str, default: int) -> int:
    try:
        return max(1, int(value))
    except (TypeError, ValueError):
        return default


class AppConfig:
    THREADS = _positive_int(os.getenv("HAMFLOW_THREADS"), 1)
    LOG_LEVEL = os.getenv("HAMFLOW_LOG_LEVEL", "INFO")
    OUTPUT_DIR = os.getenv("HAMFLOW_OUTPUT_DIR", "results")
    FLOAT_FORMAT = "%.12e"

    EXIT_OK = 0
    EXIT_CONFIG_ERROR = 2
    EXIT_NUMERICAL_FAILURE = 3

    @classmethod
    def threads(cls) -> int:
        """Worker cap, re-read so tests can patch the environment."""
        return _positive_int(os.getenv("HAMFLOW_THREADS"), cls.THREADS)
