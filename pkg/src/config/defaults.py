"""
Run defaults for commands, numerics and logging.

Values mirror the fullerene C70 analysis (t = 6.65 ms, D = 12 um,
delta_kx = 9.0e6 1/m). Every setting can be overridden via environment
variables; run config files and CLI flags take precedence over both.
"""

import os

from dotenv import load_dotenv

load_dotenv()

LOG_LEVEL = os.environ.get("GOUY_LOG_LEVEL", "INFO")

# Experiment
TIME_OF_FLIGHT = float(os.environ.get("GOUY_TIME_OF_FLIGHT", 6.65e-3))
DELTA_KX = float(os.environ.get("GOUY_DELTA_KX", 9.0e6))
DETECTOR_FWHM = float(os.environ.get("GOUY_DETECTOR_FWHM", 12e-6))
PACKET_WIDTH = float(os.environ.get("GOUY_PACKET_WIDTH", 1.0e-7))
VDW_FACTOR = float(os.environ.get("GOUY_VDW_FACTOR", 1.0 / 3.0))
VDW_THRESHOLD = float(os.environ.get("GOUY_VDW_THRESHOLD", 100e-9))
FIT_INIT = float(os.environ.get("GOUY_FIT_INIT", 5.0e6))
FIT_MAX_EVALUATIONS = int(os.environ.get("GOUY_FIT_MAX_EVALUATIONS", 200))

# Numerics
QUAD_RTOL = float(os.environ.get("GOUY_QUAD_RTOL", 1e-10))
QUAD_LIMIT = int(os.environ.get("GOUY_QUAD_LIMIT", 10_000))
ORACLE_GRID_POINTS = int(os.environ.get("GOUY_ORACLE_GRID_POINTS", 2**14))
ORACLE_NODES = int(os.environ.get("GOUY_ORACLE_NODES", 32))
ORACLE_LADDER_STEPS = int(os.environ.get("GOUY_ORACLE_LADDER_STEPS", 64))
ORACLE_SEED = int(os.environ.get("GOUY_ORACLE_SEED", 0))
