"""Configuration defaults for the diffusion segmentation engine"""

import os

# Engine defaults
DEFAULT_NUM_STAGES = 5  # five random walks, one per feature level
DEFAULT_EMBED_DIM = 16
DEFAULT_DOWNSAMPLE_FACTOR = 5
DEFAULT_SOFTMAX_TEMPERATURE = 1.0
DEFAULT_STANDARDIZE_EPSILON = 1e-5
DEFAULT_NUM_CLASSES = 2
DEFAULT_POOL_MODE = "average"

# Label conventions
IGNORE_LABEL = 255
UNSEEDED_PIXEL = 255

# Feature pyramid
DESCRIPTOR_WINDOWS = {"local": 3, "gradient": 7, "context": 15}
GRADIENT_ORIENTATION_BINS = 4
KMEANS_CLUSTERS = 8
KMEANS_ITERATIONS = 10
KMEANS_POSITION_WEIGHT = 0.25

# Deterministic initialization
PROJECTION_SEED = int(os.getenv("DIFFSEG_PROJECTION_SEED", "1234"))

# Training defaults
DEFAULT_LEARNING_RATE = 0.1
DEFAULT_EPOCHS = 200
DEFAULT_MOMENTUM = 0.9
DEFAULT_FD_EPSILON = 1e-5
GRADIENT_TOLERANCE = 1e-5

# Binary container magics
PYRAMID_MAGIC = b"FPYR"
TRANSITION_MAGIC = b"TMAT"

# Harness
MANIFEST_SUFFIX = ".manifest"
EVAL_WORKERS = int(os.getenv("DIFFSEG_EVAL_WORKERS", "4"))
HEATMAP_MAXVAL = 255
