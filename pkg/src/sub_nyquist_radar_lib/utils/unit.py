import math
import sympy
from typing import NewType

Seconds = NewType("Seconds", float)
Hertz = NewType("Hertz", float)
Decibel = NewType("Decibel", float)


class UnitConverter:
    @staticmethod
    def db_to_power_ratio(value_db: Decibel) -> float:
        if math.isinf(value_db):
            return math.inf if value_db > 0 else 0.0
        return 10 ** (value_db / 10)

    @staticmethod
    def power_ratio_to_db(ratio: float) -> Decibel:
        if ratio <= 0:
            return Decibel(-math.inf)
        return Decibel(10 * math.log10(ratio))


class UnitSymbol:
    def __init__(self, name: str | sympy.Symbol, unit: str | sympy.Symbol):
        self._symbol = sympy.Symbol(name, positive=True) if isinstance(name, str) else name
        self._unit = sympy.Symbol(unit) if isinstance(unit, str) else unit

    @property
    def unit(self) -> sympy.Symbol:
        return self._unit

    @property
    def symbol(self) -> sympy.Symbol:
        return self._symbol
