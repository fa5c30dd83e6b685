import os

from dotenv import load_dotenv


load_dotenv()

DEFAULT_N_SUBCARRIERS = int(os.getenv("RELAY_N_SUBCARRIERS", "32"))
DEFAULT_N_TAPS = int(os.getenv("RELAY_N_TAPS", "8"))
DEFAULT_MU = float(os.getenv("RELAY_MU", "0.5"))

DEFAULT_EPSILON = float(os.getenv("RELAY_EPSILON", "1e-6"))
DEFAULT_MAX_ITERS = int(os.getenv("RELAY_MAX_ITERS", "20000"))
DEFAULT_MIN_ITERS = int(os.getenv("RELAY_MIN_ITERS", "50"))
DEFAULT_STEP0 = float(os.getenv("RELAY_STEP0", "0.1"))
DEFAULT_STEP_RULE = os.getenv("RELAY_STEP_RULE", "sqrt")
DEFAULT_DUAL_UPDATE = os.getenv("RELAY_DUAL_UPDATE", "plain")
DEFAULT_AVERAGING_FRACTION = float(os.getenv("RELAY_AVERAGING_FRACTION", "0.1"))
ALPHA_FLOOR = float(os.getenv("RELAY_ALPHA_FLOOR", "1e-12"))
TYPE2_STEP_FRACTION = float(os.getenv("RELAY_TYPE2_STEP_FRACTION", "0.5"))
TYPE2_POLISH_ITERS = int(os.getenv("RELAY_TYPE2_POLISH_ITERS", "200"))

FEASIBILITY_TOL = 1e-9
ROOT_MERGE_TOL = 1e-10
INNER_KKT_TOL = 1e-8
FACE_TOL = 1e-6

ORACLE_MAX_N = 3
ORACLE_MIN_GRID = 50
ORACLE_MAX_EVALUATIONS = int(os.getenv("RELAY_ORACLE_MAX_EVALUATIONS", "4000000"))
ORACLE_POLISH_SWEEPS = 200

DEFAULT_SNR_DB = os.getenv("RELAY_SNR_DB", "-10:30:2.5")
DEFAULT_REALIZATIONS = int(os.getenv("RELAY_REALIZATIONS", "500"))
DEFAULT_WORKERS = int(os.getenv("RELAY_WORKERS", "1"))
DEFAULT_SEED = int(os.getenv("RELAY_SEED", "2012"))

CHANNEL_FILE_PATTERN = "channel_{index:04d}.txt"
SWEEP_COLUMNS = ["snr_db", "scheme", "mean_rate_bps_hz", "stderr", "n", "failures"]

CONFIG_FILE_KEYS = {
    "mu": float,
    "epsilon": float,
    "max_iters": int,
    "min_iters": int,
    "step0": float,
    "step_rule": str,
    "dual_update": str,
    "n": int,
    "taps": int,
    "realizations": int,
    "workers": int,
}
