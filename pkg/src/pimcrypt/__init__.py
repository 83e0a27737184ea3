"""Near-memory AES-128/SHA-256 kernels, machine model and scaling harness."""

from .aes import (
    GfLookupTables,
    aes128_encrypt_block,
    aes128_encrypt_buffer,
    build_gf_tables,
    key_expansion,
)
from .bench import (
    ExperimentResult,
    ExperimentSpec,
    HostProfile,
    KernelCharacterization,
    characterize_kernel,
    emit_csv,
    run_experiment,
    run_host_baseline,
    run_rank_scaling,
    run_strong_scaling,
    run_tasklet_scaling,
    run_weak_scaling,
)
from .errors import (
    AlignmentError,
    CapacityError,
    MramAccessError,
    PimcryptError,
    ProfileError,
)
from .machine import (
    Config,
    DpuWorkload,
    ExecutionTimeline,
    KernelCost,
    MachineProfile,
    TimelineEvent,
    bundled_default_config,
    default_profile,
    effective_ipc,
    load_config,
    mram_access_cycles,
    simulate_dpu_kernel,
    simulate_rank_kernel,
    simulate_transfer,
)
from .orchestrator import (
    AesWorkload,
    JobResult,
    PartitionPlan,
    ShaWorkload,
    Strategy,
    partition_aes,
    partition_sha,
    plan_job,
    run_job,
    validate_timeline,
)
from .sha256 import sha256_digest, sha256_many, sha256_pad

__version__ = "0.1.0"

__all__ = [
    "AesWorkload",
    "AlignmentError",
    "CapacityError",
    "Config",
    "DpuWorkload",
    "ExecutionTimeline",
    "ExperimentResult",
    "ExperimentSpec",
    "GfLookupTables",
    "HostProfile",
    "JobResult",
    "KernelCharacterization",
    "KernelCost",
    "MachineProfile",
    "MramAccessError",
    "PartitionPlan",
    "PimcryptError",
    "ProfileError",
    "ShaWorkload",
    "Strategy",
    "TimelineEvent",
    "aes128_encrypt_block",
    "aes128_encrypt_buffer",
    "build_gf_tables",
    "bundled_default_config",
    "characterize_kernel",
    "default_profile",
    "effective_ipc",
    "emit_csv",
    "key_expansion",
    "load_config",
    "mram_access_cycles",
    "partition_aes",
    "partition_sha",
    "plan_job",
    "run_experiment",
    "run_host_baseline",
    "run_job",
    "run_rank_scaling",
    "run_strong_scaling",
    "run_tasklet_scaling",
    "run_weak_scaling",
    "sha256_digest",
    "sha256_many",
    "sha256_pad",
    "simulate_dpu_kernel",
    "simulate_rank_kernel",
    "simulate_transfer",
    "validate_timeline",
]
