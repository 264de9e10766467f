import dataclasses
import fractions

import sympy


def to_rational(value: float | int | str) -> sympy.Rational:
    """Exact rational from the decimal representation, so 1e8 * 1e-4 is exactly 10000."""
    if isinstance(value, float):
        value = repr(value)
    fraction = fractions.Fraction(value)
    return sympy.Rational(fraction.numerator, fraction.denominator)


class FormulaBase:
    """Symbols and formulas held as dataclasses of UnitSymbol; subclasses define both and fill the formulas."""
    Symbols: type
    Formulas: type

    def __init__(self):
        self._symbols = self.Symbols()
        self._formulas = self.Formulas()
        self._init_formula()

    def _init_formula(self):
        raise NotImplementedError

    @property
    def symbols(self):
        return self._symbols

    @property
    def formulas(self):
        return self._formulas

    def display(self):
        self._symbols.display()
        self._formulas.display()

    def calculate(self, values: dict[str, float | int | str]) -> dict[str, sympy.Expr]:
        """Evaluate every formula exactly; `values` maps symbol field names to numbers."""
        substitutions = {}
        for field in dataclasses.fields(self._symbols):
            if field.name not in values:
                raise ValueError(f"Symbol {field.name} has no value.")
            substitutions[getattr(self._symbols, field.name).symbol] = to_rational(values[field.name])

        return {
            field.name: getattr(self._formulas, field.name).symbol.subs(substitutions)
            for field in dataclasses.fields(self._formulas)
        }
