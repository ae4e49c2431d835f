"""
Parameters and settings
"""
import os
from pathlib import Path

from dotenv import load_dotenv

from predictoco import __file__

predictoco_path = Path(__file__).parent
project_path = predictoco_path.parent

load_dotenv(dotenv_path=predictoco_path / ".env")

DATA_PATHS = {}
DATA_PATHS["results"] = project_path / "results"
DATA_PATHS["predictoco"] = project_path / "predictoco"
DATA_PATHS["example_system"] = project_path / "example_system"
DATA_PATHS["tests"] = project_path / "tests"
DATA_PATHS["test_data"] = DATA_PATHS["tests"] / "data"

DEFAULT_SETTINGS_PATH = DATA_PATHS["example_system"] / "verify_settings.yml"

SETTINGS = {}
SETTINGS["JOBS"] = int(os.environ.get("PREDICTOCO_JOBS") or 1)
SETTINGS["RESULTS"] = os.environ.get("PREDICTOCO_RESULTS") or str(
    DATA_PATHS["results"]
)
