"""
Singular complex analytic vector fields X = f(z) d/dz
"""

from functools import cached_property
from typing import Optional, Union

from .exceptions import (
    EvalOverflowError, EvalPoleError, InvalidBasePointError, PathThroughSingularityError,
)
from .expr import (
    ONE, POLE_THRESHOLD, Div, ExprAst, Var, differentiate, compose, div, mul, neg, normalize,
    power,
)
from .logger import get_logger
from .parser import parse


BASE_CANDIDATES = (0j, 1 + 0j, 1j, -1 + 0j, -1j, 0.5 + 0.5j, 0.3 + 0.7j, -0.6 + 0.2j, 2 + 0.5j)

Source = Union[str, ExprAst]


def _as_ast(source: Source, variable: str = "z") -> ExprAst:
    return source if isinstance(source, ExprAst) else parse(source, variable)


class VectorField:
    """
    The field f together with its time form dz/f and the anchor of Psi

    Psi(z) = base_value + integral of dz/f from base_point to z.
    """

    def __init__(self, f: Source, base_point: Optional[complex] = None,
                 base_value: complex = 0j, declared_period: Optional[complex] = None,
                 label: str = "", psi: Optional[ExprAst] = None, chart: str = "z"):
        self.f = _as_ast(f, "w" if chart == "w" else "z")
        self.declared_period = declared_period
        self.label = label or self.f.text
        self.psi = psi
        self.chart = chart
        self.base_value = complex(base_value)

        if base_point is None:
            self.base_point = self._auto_base_point()
        else:
            self.base_point = complex(base_point)
            if not self.is_regular(self.base_point):
                raise InvalidBasePointError(
                    f"Base point {self.base_point} is not a regular point of {self.label}")

        if psi is not None:
            self.base_value = complex(psi(self.base_point))

    @classmethod
    def from_source(cls, source: str, **kwargs) -> "VectorField":
        """Parse f from text"""
        return cls(parse(source), **kwargs)

    @classmethod
    def from_psi(cls, psi_source: Source, **kwargs) -> "VectorField":
        """Field with f = 1/Psi' for a closed-form Psi, which is kept"""
        psi = _as_ast(psi_source)
        f = ExprAst(normalize(div(ONE, differentiate(psi).normalized)))
        kwargs.setdefault("label", f"1/({psi.text})'")
        return cls(f, psi=psi, **kwargs)

    def _auto_base_point(self) -> complex:
        for z in BASE_CANDIDATES:
            if self.is_regular(z):
                return z
        raise InvalidBasePointError(f"No regular base point found for {self.label}")

    @cached_property
    def fprime(self) -> ExprAst:
        return differentiate(self.f)

    def __call__(self, z: complex) -> complex:
        return self.f(z)

    def derivative(self, z: complex) -> complex:
        return self.fprime(z)

    def is_regular(self, z: complex) -> bool:
        """f finite and nonzero at z"""
        try:
            value = self.f(z)
        except (EvalPoleError, EvalOverflowError):
            return False
        return abs(value) > 1e-12

    def time_density(self, z: complex) -> complex:
        """
        The time form 1/f at z

        Poles of f are zeros of the time form, so a signaled pole or overflow yields 0.

        Raises:
            PathThroughSingularityError: f vanishes at z
        """
        try:
            value = self.f(z)
        except (EvalPoleError, EvalOverflowError):
            return 0j
        if abs(value) < POLE_THRESHOLD:
            raise PathThroughSingularityError(z)
        return 1.0 / value

    def at_infinity(self) -> "VectorField":
        """The field in the chart w = 1/z, where it reads -w^2 f(1/w) d/dw"""
        w = ExprAst(Var("w"), "w")
        inverse = ExprAst(Div(ONE, Var("w")), "w")
        flipped = compose(self.f, inverse)
        root = normalize(neg(mul(power(w.root, 2), flipped.normalized)))
        base_point = None
        base_value = 0j
        if self.base_point != 0:
            base_point = 1.0 / self.base_point
            base_value = self.base_value
        get_logger().debug("Chart flip of %s", self.label)
        try:
            return VectorField(ExprAst(root, "w"), base_point=base_point, base_value=base_value,
                               label=f"{self.label} at infinity", chart="w")
        except InvalidBasePointError:
            return VectorField(ExprAst(root, "w"), label=f"{self.label} at infinity", chart="w")

    def describe(self) -> dict:
        return {
            "expression": self.f.text,
            "hash": self.f.hash,
            "label": self.label,
            "chart": self.chart,
            "base_point": self.base_point,
            "base_value": self.base_value,
            "declared_period": self.declared_period,
        }

    def __repr__(self) -> str:
        return f"VectorField({self.f.text!r}, base_point={self.base_point!r})"

