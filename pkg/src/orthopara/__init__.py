"""Metastable ortho/para-helium superpositions.

Level-table parsing and near-degeneracy search, superposition preparation
from electron-capture spin states, decay rates / lifetimes / quantum beats,
and photocount statistics with a superposition-vs-mixture discriminator.
"""

from importlib import resources

from . import constants, counting, dynamics, exceptions, spectra, states
from .counting import (
    CountDistribution,
    CountSample,
    DiscriminationReport,
    Hypothesis,
    MixtureVariant,
    Verdict,
    decompose_superposition_pmf,
    discriminate,
    mixture_pmf,
    poisson_pmf,
    sample_counts,
)
from .dynamics import (
    BeatModel,
    Branch,
    DecayChannel,
    averaged_rate,
    beat_omega_from_levels,
    beat_signal,
    instantaneous_rate,
    lifetime,
)
from .spectra import (
    DegeneratePair,
    EnergyLevel,
    ParserConfig,
    broadening_from_lifetime,
    find_degenerate_pairs,
    load_level_table,
    parse_level_table,
    serialize_level_table,
)
from .states import (
    SpinState,
    SuperpositionState,
    SuperselectionReport,
    amplitudes_from_weights,
    prepare_superposition,
    superselection_allowed,
)

__version__ = "0.1.0"


def bundled_levels_path():
    """Path to the bundled curated He I level table."""
    return resources.files(__name__) / "data" / "helium_levels.txt"
