import dataclasses

import sympy
from IPython.display import display, Latex

from sub_nyquist_radar_lib.base.base import FormulaBase
from sub_nyquist_radar_lib.utils.exceptions import ConfigError
from sub_nyquist_radar_lib.utils.unit import UnitSymbol, Seconds, Hertz
from sub_nyquist_radar_lib.utils.util import display_latex_symbol_and_unit


def _symbol(name: str, unit: str):
    return dataclasses.field(default_factory=lambda: UnitSymbol(name, unit))


class RadarResolution(FormulaBase):
    """Grid, resolution and unambiguous-interval formulas of a pulse-Doppler CPI."""

    @dataclasses.dataclass
    class Symbols:
        B: UnitSymbol = _symbol('B', 'Hz')
        T: UnitSymbol = _symbol('T', 's')
        T_p: UnitSymbol = _symbol('T_p', 's')
        L: UnitSymbol = _symbol('L', '-')

        def display(self):
            display(Latex("----- Symbols -----"))
            display_latex_symbol_and_unit("Bandwidth", self.B.symbol, self.B.unit)
            display_latex_symbol_and_unit("Pulse repetition interval", self.T.symbol, self.T.unit)
            display_latex_symbol_and_unit("Pulse width", self.T_p.symbol, self.T_p.unit)
            display_latex_symbol_and_unit("Pulses per CPI", self.L.symbol, self.L.unit)

    @dataclasses.dataclass
    class Formulas:
        tau0: UnitSymbol = _symbol('tau_0', 's')
        nu0: UnitSymbol = _symbol('nu_0', 'Hz')
        T_nyq: UnitSymbol = _symbol('T_nyq', 's')
        N: UnitSymbol = _symbol('N', '-')
        pulse_samples: UnitSymbol = _symbol('N_p', '-')
        tau_max: UnitSymbol = _symbol('tau_max', 's')
        nu_max: UnitSymbol = _symbol('nu_max', 'Hz')

        def display(self):
            display(Latex("----- Formula -----"))
            display_latex_symbol_and_unit("Delay resolution", self.tau0.symbol, self.tau0.unit)
            display_latex_symbol_and_unit("Doppler resolution", self.nu0.symbol, self.nu0.unit)
            display_latex_symbol_and_unit("Nyquist samples per PRI", self.N.symbol, self.N.unit)
            display_latex_symbol_and_unit("Unambiguous delay bound", self.tau_max.symbol, self.tau_max.unit)
            display_latex_symbol_and_unit("Unambiguous Doppler bound", self.nu_max.symbol, self.nu_max.unit)

    def _init_formula(self):
        s = self._symbols

        self._formulas.tau0 = UnitSymbol(1 / s.B.symbol, 's')
        self._formulas.nu0 = UnitSymbol(1 / (s.L.symbol * s.T.symbol), 'Hz')
        self._formulas.T_nyq = UnitSymbol(1 / s.B.symbol, 's')
        self._formulas.N = UnitSymbol(s.B.symbol * s.T.symbol, '-')
        self._formulas.pulse_samples = UnitSymbol(s.B.symbol * s.T_p.symbol, '-')
        self._formulas.tau_max = UnitSymbol(s.T.symbol - s.T_p.symbol, 's')
        self._formulas.nu_max = UnitSymbol(1 / (2 * s.T.symbol), 'Hz')


class RadarParams:
    def __init__(self,
                 B: Hertz,  # Hz
                 T: Seconds,  # s
                 T_p: Seconds,  # s
                 L: int,  # pulses per CPI
                 M: int,  # compressive measurements per PRI
                 ):
        if min(B, T, T_p) <= 0 or L < 1 or M < 1:
            raise ConfigError("Radar parameters must be positive.")
        if T_p >= T:
            raise ConfigError(f"Pulse width {T_p} s must be shorter than the PRI {T} s.")

        self._B = float(B)
        self._T = float(T)
        self._T_p = float(T_p)
        self._L = int(L)
        self._M = int(M)

        self._exact = RadarResolution().calculate({"B": B, "T": T, "T_p": T_p, "L": L})
        self._N = int(round(self._exact["N"]))
        self._pulse_samples = int(round(self._exact["pulse_samples"]))

        if self._M >= self._N:
            raise ConfigError(f"M={self._M} must be smaller than N={self._N}.")

    @classmethod
    def from_samples(cls,
                     N: int,  # Nyquist samples per PRI
                     M: int,
                     L: int,
                     B: Hertz = 1e8,  # Hz
                     pulse_fraction: float = 0.25,  # T_p / T
                     ) -> "RadarParams":
        T = N / B
        return cls(B=B, T=T, T_p=T * pulse_fraction, L=L, M=M)

    def with_measurements(self, M: int) -> "RadarParams":
        return RadarParams(self._B, self._T, self._T_p, self._L, M)

    @property
    def B(self) -> Hertz:
        return self._B

    @property
    def T(self) -> Seconds:
        return self._T

    @property
    def T_p(self) -> Seconds:
        return self._T_p

    @property
    def L(self) -> int:
        return self._L

    @property
    def M(self) -> int:
        return self._M

    @property
    def N(self) -> int:
        return self._N

    @property
    def pulse_samples(self) -> int:
        return self._pulse_samples

    @property
    def T_nyq(self) -> Seconds:
        return float(self._exact["T_nyq"])

    @property
    def tau0(self) -> Seconds:
        return float(self._exact["tau0"])

    @property
    def nu0(self) -> Hertz:
        return float(self._exact["nu0"])

    @property
    def tau_max(self) -> Seconds:
        return float(self._exact["tau_max"])

    @property
    def nu_max(self) -> Hertz:
        return float(self._exact["nu_max"])

    @property
    def compression_ratio(self) -> float:
        return self._M / self._N

    @property
    def exact(self) -> dict[str, sympy.Expr]:
        return dict(self._exact)

    def __repr__(self) -> str:
        return (f"RadarParams(B={self._B}, T={self._T}, T_p={self._T_p}, L={self._L}, "
                f"M={self._M}, N={self._N})")
