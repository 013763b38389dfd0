"""ECG-derived respiration rate estimation: DFT-peak baseline, autoencoder,
and autoencoder with a trainable DCT layer."""

from .dct_layer import DctLayer, dct_layer_backward, dct_layer_forward
from .datagen import GenConfig, generate_dataset, load_dataset, split_dataset, synth_record
from .harness import Method, Metrics, Report, estimate_rr, evaluate, run_experiment
from .net import Autoencoder, ae_backward, ae_forward
from .spectral import EcgRecord, Spectrum32, dft_peak_rr, extract_spectrum
from .training import Model, TrainConfig, load_model, save_model, train

__version__ = "0.1.0"
