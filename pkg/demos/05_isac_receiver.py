"""Sensing and communication on one frame.

A Zadoff-Chu pilot is superimposed on 4-QAM data and sent through a
Veh-A channel with 6 kHz maximum Doppler. The receiver reads the channel
off the pilot's ambiguity line, equalizes, and then alternates between
cancelling the detected data and re-estimating the channel.
"""

import numpy as np

from zakwave.experiments import ExperimentConfig, isac_frame_bers, isac_setup

cfg = ExperimentConfig(experiment="isac", nu_max=6000.0, iters=5).resolved()
setup = isac_setup(cfg)
print(f"sensing region {len(setup.region)} taps ({100 * setup.prior_captured:.1f}% of mean channel power), "
      f"refinement region {len(setup.joint_region)} taps")

for pdr in cfg.pdr:
    B = np.array([isac_frame_bers(cfg, setup, pdr, f) for f in range(20)])
    trace = " -> ".join(f"{b:.3f}" for b in B.mean(axis=0))
    print(f"PDR {pdr:>4}: mean BER per turbo iteration {trace}")
