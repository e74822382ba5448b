from enum import Enum, IntEnum, auto

import aenum

# y-sequences are materialized up to this index; beyond it counts are closed-form.
MATERIALIZE_LIMIT = 24

# Largest extension degree accepted by the field grammar.
MAX_EXTENSION_DEGREE = 8

# Sign relating ξ ∪ v to δ(v) under the Koszul conventions of this package.
CUP_DELTA_SIGN = 1


class FieldKind(Enum):
    rationals = auto()
    prime = auto()
    extension = auto()


class Variant(Enum):
    analytic = auto()
    continuous = auto()


class Filtration(Enum):
    columns = auto()
    rows = auto()


class ReportFormat(Enum):
    json = "json"
    csv = "csv"
    text = "text"


class ExitCode(IntEnum):
    ok = 0
    failed = 1
    usage = 2


class SuiteModule(Enum):
    combinatorics = auto()
    koszul = auto()
    herr = auto()
    spectral = auto()
    cup = auto()
    dolbeault = auto()


class Suite(aenum.Enum, settings=aenum.NoAlias):  # type: ignore
    combinatorics = SuiteModule.combinatorics
    koszul_duality = SuiteModule.koszul
    decompose = SuiteModule.koszul
    fx_dims = SuiteModule.herr
    euler = SuiteModule.herr
    iterated_rhom = SuiteModule.herr
    base_change = SuiteModule.herr
    spectral_collapse = SuiteModule.spectral
    cup_delta = SuiteModule.cup
    pairing = SuiteModule.cup
    dolbeault = SuiteModule.dolbeault
    frolicher = SuiteModule.dolbeault
    quad_matrix = SuiteModule.dolbeault

    @staticmethod
    def getByName(name: str) -> "Suite":
        if not isinstance(name, str):
            raise TypeError("Invalid Suite")
        try:
            return Suite[name.replace("-", "_")]
        except KeyError:
            raise ValueError(f"Unknown suite: {name}.")

    def cliName(self) -> str:
        return self.name.replace("_", "-")

    def module(self) -> SuiteModule:
        return self.value
