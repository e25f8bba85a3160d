from .box import ChannelBox, reflect_walls
from .ensemble import OverlapCounters, ParticleEnsemble, sample_initial
from .overlaps import cell_list_pairs, overlapping_pairs, resolve_overlaps
from .dynamics import (
    ConstantForce, EnsembleResult, HistogramSpec, ParticleSetup, TiltedForce,
    em_step, run_ensemble,
)
from .metropolis import MHResult, mh_sample
