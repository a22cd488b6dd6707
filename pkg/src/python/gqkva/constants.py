"""
Static configuration constants for the gqkva toolkit.

Dependency-free constants store shared by the CLI, trainer and report writers.
No runtime logic and no environment lookups.
"""

# ---------------------------------------------------------------------------
# Version
# ---------------------------------------------------------------------------
VERSION = "1.0.0"

# ---------------------------------------------------------------------------
# CLI help text
# ---------------------------------------------------------------------------
HELP_EPILOG = r"""
Scheme grammar (case-insensitive):
  mha | mqa | mkva | gqa-<g> | gkva-<g> | gqkva-<g_q>.<g_kv>
  Bundles: table1 (the nine published ViT-small rows), all (every valid scheme for --heads)

Examples:
  Parameter and size columns for the published comparison:
    %(prog)s count --preset vit-small --schemes table1
    %(prog)s count --preset vit-small --schemes mha gqkva-3.2 --format json --out counts.json

  Invariant suite:
    %(prog)s verify --schemes all --seed 7
    %(prog)s verify --schemes gqa-2 gkva-3 --heads 6 --scale-mode embed-dim

  Training-step timing:
    %(prog)s bench --preset tiny --schemes table1 --batch 32 --iters 10 --out bench.csv

  Toy training run:
    %(prog)s train --preset tiny --schemes gqkva-2.3 --steps 300 --seed 1 --out runs/gqkva-2.3
    %(prog)s train --preset tiny --schemes mha --lr 0 --steps 20

  Scatter series (size vs accuracy, TPS vs accuracy):
    %(prog)s scatter --reference --out scatter
    %(prog)s scatter --records bench.json --out scatter

Exit codes: 0 success, 1 failure, 2 usage error, 3 invariant failure,
            4 diverged training, 5 file I/O error.
"""

# ---------------------------------------------------------------------------
# Numerics
# ---------------------------------------------------------------------------
LAYERNORM_EPS = 1e-6
INIT_STD = 0.02
INIT_TRUNCATION = 2.0  # in units of INIT_STD
FINITE_DIFF_STEP = 1e-5
BYTES_PER_PARAM = 4
MIB = 2**20

# ---------------------------------------------------------------------------
# Optimizer / training defaults
# ---------------------------------------------------------------------------
DEFAULT_LR = 1e-3
DEFAULT_BETAS = (0.9, 0.999)
DEFAULT_ADAM_EPS = 1e-8
DEFAULT_WEIGHT_DECAY = 0.05  # toy default; not stated for the published runs
DEFAULT_SCHEDULE = "cosine"  # toy default; not stated for the published runs
DEFAULT_TOY_BATCH = 32
FULL_SCALE_BATCH = 288
DEFAULT_STEPS = 300
DEFAULT_SEED = 0
SYNTH_SAMPLES = 600
SYNTH_CLASSES = 6
VALIDATION_EVERY = 10  # one sample in ten goes to the validation split

# ---------------------------------------------------------------------------
# Benchmark defaults
# ---------------------------------------------------------------------------
DEFAULT_WARMUP_ITERS = 2
DEFAULT_TIMED_ITERS = 10
MIN_TIMED_ITERS = 5

# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------
BENCH_CSV_FIELDS = (
    "scheme",
    "params_m",
    "size_mib",
    "flops",
    "tps_batch_ms",
    "tps_sample_ms",
    "delta_params_pct",
    "acc_top1",
)
SCATTER_CSV_FIELDS = ("x", "y")
CHECKPOINT_MAGIC = b"GQKVCKPT"
CHECKPOINT_FORMAT_VERSION = 1
DATASET_META_FILE = "dataset.json"
DATASET_IMAGES_FILE = "images.bin"
DATASET_LABELS_FILE = "labels.bin"
TRAIN_LOG_FILE = "train_log.jsonl"
CHECKPOINT_FILE = "model.ckpt"
