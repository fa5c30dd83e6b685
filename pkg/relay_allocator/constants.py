from enum import Enum


class Scheme(Enum):
    TYPE1_OPT = "type1-opt"
    TYPE1_UNIFORM = "type1-uniform"
    TYPE2_OPT = "type2-opt"


class Objective(Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"
    MA_ONLY = "ma_only"
    BC_ONLY = "bc_only"


class StepRule(Enum):
    SQRT = "sqrt"
    HARMONIC = "harmonic"


class DualUpdate(Enum):
    PLAIN = "plain"
    SCALED = "scaled"


class InnerCase(Enum):
    BOTH_ACTIVE = 1
    ONLY_FIRST = 2
    ONLY_SECOND = 3
    SILENT = 4


LINKS = ("g1", "g2", "gt1", "gt2")
ALLOCATION_KEYS = ("p1", "p2", "pr")
