"""NIST-style helium level tables and the near-degeneracy search.

Table format (UTF-8 text, one record per line):

    configuration | term | J | energy

Lines starting with ``#`` and blank lines are ignored.  The term symbol is
``<multiplicity><L letter>[*]`` (``*`` marks odd parity), e.g. ``3F*`` for a
triplet F-odd level.  J is an integer or a ``p/q`` rational.  The energy field
may carry a trailing unit token (``eV`` or ``cm-1``); rows without a token use
the unit declared in :class:`ParserConfig`.  Energies are converted to eV at
the parse boundary and stay in eV everywhere else.

Two levels of opposite multiplicity count as "almost degenerate" when their
energy difference does not exceed a broadening ``delta_E``, typically the
natural linewidth ``hbar / tau`` of the decaying levels.
"""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable

from .constants import EV_PER_CM1, HBAR_EV_S
from .exceptions import (
    MalformedJ,
    MalformedRow,
    MalformedTerm,
    NegativeEnergy,
    NonPositiveLifetime,
    UnknownUnit,
)

__all__ = [
    "EnergyLevel",
    "DegeneratePair",
    "ParserConfig",
    "parse_level_table",
    "load_level_table",
    "serialize_level_table",
    "broadening_from_lifetime",
    "find_degenerate_pairs",
]

# Spectroscopic L letters in series order (J is skipped by convention).
_L_LETTERS = "SPDFGHIKLMNOQRTUVWXYZ"
_L_OF_LETTER = {letter: l for l, letter in enumerate(_L_LETTERS)}

_TERM_RE = re.compile(r"^(\d+)([A-Z])(\*?)$")


@dataclass(frozen=True)
class EnergyLevel:
    """One row of a spectroscopic level table.

    energy is in eV relative to the ground level; multiplicity is 1 (para,
    singlet) or 3 (ortho, triplet); orbital_l is the total-L quantum number
    decoded from the term letter.
    """

    configuration: str
    term: str
    j: Fraction
    energy: float
    multiplicity: int
    orbital_l: int

    def __post_init__(self):
        if not (math.isfinite(self.energy) and self.energy >= 0.0):
            raise NegativeEnergy(f"energy must be finite and >= 0, got {self.energy!r}")
        if self.multiplicity not in (1, 3):
            raise MalformedTerm(
                f"multiplicity must be 1 or 3, got {self.multiplicity}"
            )
        if self.j < 0 or (2 * self.j).denominator != 1:
            raise MalformedJ(f"J must be a non-negative multiple of 1/2, got {self.j}")

    @property
    def is_ortho(self) -> bool:
        return self.multiplicity == 3

    @property
    def is_para(self) -> bool:
        return self.multiplicity == 1

    def to_dict(self) -> dict:
        return {
            "configuration": self.configuration,
            "term": self.term,
            "j": str(self.j),
            "energy_ev": self.energy,
            "multiplicity": self.multiplicity,
            "orbital_l": self.orbital_l,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnergyLevel":
        return cls(
            configuration=d["configuration"],
            term=d["term"],
            j=Fraction(d["j"]),
            energy=float(d["energy_ev"]),
            multiplicity=int(d["multiplicity"]),
            orbital_l=int(d["orbital_l"]),
        )


@dataclass(frozen=True)
class DegeneratePair:
    """An ortho/para level pair whose splitting lies within the broadening."""

    ortho: EnergyLevel
    para: EnergyLevel
    delta_e: float  # |E_ortho - E_para|, eV
    broadening: float  # the delta_E used for the decision, eV

    def __post_init__(self):
        if not (self.ortho.multiplicity == 3 and self.para.multiplicity == 1):
            raise ValueError("pair must combine an ortho (triplet) and a para (singlet) level")
        if not self.delta_e <= self.broadening:
            raise ValueError(
                f"delta_e={self.delta_e!r} exceeds broadening={self.broadening!r}"
            )

    def to_dict(self) -> dict:
        return {
            "ortho": self.ortho.to_dict(),
            "para": self.para.to_dict(),
            "delta_e_ev": self.delta_e,
            "broadening_ev": self.broadening,
        }


@dataclass(frozen=True)
class ParserConfig:
    """Parse-boundary options.

    default_unit applies to rows whose energy field carries no unit token;
    ``None`` makes the token mandatory.
    """

    default_unit: str | None = None


def _parse_term(term: str, line_number: int | None) -> tuple[int, int]:
    """Decode a term symbol into (multiplicity, L)."""
    m = _TERM_RE.match(term)
    if m is None:
        raise MalformedTerm(f"unparseable term symbol {term!r}", line_number)
    multiplicity = int(m.group(1))
    if multiplicity not in (1, 3):
        raise MalformedTerm(
            f"term {term!r} has multiplicity {multiplicity}, expected 1 or 3",
            line_number,
        )
    letter = m.group(2)
    if letter not in _L_OF_LETTER:
        raise MalformedTerm(f"term {term!r} has unknown L letter {letter!r}", line_number)
    return multiplicity, _L_OF_LETTER[letter]


def _parse_j(text: str, line_number: int | None) -> Fraction:
    try:
        j = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise MalformedJ(f"unparseable J value {text!r}", line_number) from None
    if j < 0 or (2 * j).denominator != 1:
        raise MalformedJ(
            f"J={text!r} is not a non-negative multiple of 1/2", line_number
        )
    return j


def _parse_energy(field: str, config: ParserConfig, line_number: int | None) -> float:
    parts = field.split()
    if len(parts) == 2:
        value_text, unit = parts
    elif len(parts) == 1:
        value_text, unit = parts[0], config.default_unit
        if unit is None:
            raise UnknownUnit(
                f"energy field {field!r} has no unit token and no default unit is set",
                line_number,
            )
    else:
        raise MalformedRow(f"unparseable energy field {field!r}", line_number)
    try:
        value = float(value_text)
    except ValueError:
        raise MalformedRow(f"unparseable energy value {value_text!r}", line_number) from None
    if unit == "eV":
        energy = value
    elif unit == "cm-1":
        energy = value * EV_PER_CM1
    else:
        raise UnknownUnit(f"unknown energy unit {unit!r} (expected 'eV' or 'cm-1')", line_number)
    if not (math.isfinite(energy) and energy >= 0.0):
        raise NegativeEnergy(f"energy {field!r} is negative or non-finite", line_number)
    return energy


def parse_level_table(
    source: str | bytes | IO, config: ParserConfig = ParserConfig()
) -> list[EnergyLevel]:
    """Parse a level table into a list of EnergyLevel, preserving row order.

    source may be the table text (str or UTF-8 bytes) or an open file-like
    object.  The first malformed row raises a LevelTableError subclass
    carrying its line number.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw

    levels: list[EnergyLevel] = []
    for line_number, raw_line in enumerate(io.StringIO(text), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) != 4:
            raise MalformedRow(
                f"expected 4 pipe-delimited fields, got {len(fields)}", line_number
            )
        configuration, term, j_text, energy_field = fields
        multiplicity, orbital_l = _parse_term(term, line_number)
        j = _parse_j(j_text, line_number)
        energy = _parse_energy(energy_field, config, line_number)
        levels.append(
            EnergyLevel(
                configuration=configuration,
                term=term,
                j=j,
                energy=energy,
                multiplicity=multiplicity,
                orbital_l=orbital_l,
            )
        )
    return levels


def load_level_table(path: str | Path, config: ParserConfig = ParserConfig()) -> list[EnergyLevel]:
    """Read and parse a level table file."""
    return parse_level_table(Path(path).read_bytes(), config)


def serialize_level_table(levels: Iterable[EnergyLevel]) -> str:
    """Render levels back into the table format (energies in eV).

    Energies are written with 17 significant digits so parse -> serialize ->
    parse is the identity.
    """
    lines = ["# configuration | term | J | energy"]
    for lv in levels:
        lines.append(
            f"{lv.configuration} | {lv.term} | {lv.j} | {lv.energy:.16e} eV"
        )
    return "\n".join(lines) + "\n"


def broadening_from_lifetime(tau: float) -> float:
    """Natural linewidth hbar / tau in eV for a mean lifetime tau in seconds."""
    if not (math.isfinite(tau) and tau > 0.0):
        raise NonPositiveLifetime(f"lifetime must be > 0, got {tau!r}")
    return HBAR_EV_S / tau


def find_degenerate_pairs(
    levels: Iterable[EnergyLevel],
    broadening: float,
    *,
    same_configuration_only: bool = False,
) -> list[DegeneratePair]:
    """All ortho/para cross pairs with |E_ortho - E_para| <= broadening.

    The comparison is exact floating-point: the broadening itself is the
    tolerance, no extra epsilon.  Pairs come back sorted by delta_e ascending,
    ties broken by (ortho energy, para energy).  Same-multiplicity levels are
    never paired, regardless of their splitting.  same_configuration_only
    additionally requires both levels to share the configuration label.
    """
    if not (math.isfinite(broadening) and broadening > 0.0):
        raise ValueError(f"broadening must be > 0, got {broadening!r}")
    ortho_levels = [lv for lv in levels if lv.is_ortho]
    para_levels = [lv for lv in levels if lv.is_para]
    pairs = []
    for o in ortho_levels:
        for p in para_levels:
            if same_configuration_only and o.configuration != p.configuration:
                continue
            delta = abs(o.energy - p.energy)
            if delta <= broadening:
                pairs.append(
                    DegeneratePair(ortho=o, para=p, delta_e=delta, broadening=broadening)
                )
    pairs.sort(key=lambda pr: (pr.delta_e, pr.ortho.energy, pr.para.energy))
    return pairs
