//! Shared domain types and validation used by every other module.
//!
//! All memory quantities are integer MiB; all times are `f64` simulated
//! seconds. Every type here is an immutable value and safe to share or
//! send between tasks.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Identity of one virtual client, stable across rounds.
///
/// Total order is the integer order, which fixes queue order and all
/// deterministic iteration in the rest of the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClientId(pub u64);

impl fmt::Display for ClientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "client-{}", self.0)
    }
}

/// One simulated GPU device.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GpuDevice {
    /// Unique within a cluster; placement is first-fit by ascending index.
    pub device_index: u32,
    pub vram_mb: u64,
}

/// Capacities of the simulated machine.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpec {
    /// Total CPU cores, fractional cores allowed.
    pub cpu_cores: f64,
    /// May be empty for a CPU-only cluster.
    pub gpus: Vec<GpuDevice>,
}

impl ClusterSpec {
    pub fn total_vram_mb(&self) -> u64 {
        self.gpus.iter().map(|g| g.vram_mb).sum()
    }

    /// Largest single-device VRAM, 0 for a GPU-less cluster.
    pub fn max_device_vram_mb(&self) -> u64 {
        self.gpus.iter().map(|g| g.vram_mb).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), SpecViolation> {
        if !self.cpu_cores.is_finite() || self.cpu_cores < 1.0 {
            return Err(SpecViolation::BadCluster {
                reason: format!("cpu_cores must be >= 1, got {}", self.cpu_cores),
            });
        }
        let mut seen = Vec::new();
        for g in &self.gpus {
            if g.vram_mb == 0 {
                return Err(SpecViolation::BadCluster {
                    reason: format!("device {} has zero VRAM", g.device_index),
                });
            }
            if seen.contains(&g.device_index) {
                return Err(SpecViolation::BadCluster {
                    reason: format!("duplicate device index {}", g.device_index),
                });
            }
            seen.push(g.device_index);
        }
        Ok(())
    }
}

/// Resources allocated to one client task.
///
/// `num_gpus` is a fraction of a single device in `[0, 1]`; `vram_mb` is the
/// VRAM budget on that device. A spec with `num_gpus == 0` never occupies a
/// device and its `vram_mb` is ignored by placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceSpec {
    pub num_cpus: f64,
    pub num_gpus: f64,
    pub vram_mb: u64,
}

impl ResourceSpec {
    pub const ZERO: ResourceSpec = ResourceSpec {
        num_cpus: 0.0,
        num_gpus: 0.0,
        vram_mb: 0,
    };
}

/// Why a `ResourceSpec` cannot run on a given cluster.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecViolation {
    #[error("cpu demand exceeds capacity: {demand} cores requested, {capacity} available")]
    CpuExceedsCapacity { demand: f64, capacity: f64 },
    #[error("gpu fraction {0} outside [0, 1]")]
    GpuFractionOutOfRange(f64),
    #[error("gpu fraction requested but cluster has no GPU devices")]
    NoGpuDevices,
    #[error("vram demand exceeds capacity: {demand} MiB requested, largest device holds {largest} MiB")]
    VramExceedsDevice { demand: u64, largest: u64 },
    #[error("resource spec contains a non-finite value")]
    NonFinite,
    #[error("invalid cluster: {reason}")]
    BadCluster { reason: String },
}

/// Checks every `ResourceSpec` invariant against a cluster.
///
/// Violations are ordinary return values, not faults; this runs before any
/// scheduler admission so no admitted client ever carries a bad spec.
pub fn validate_resource_spec(
    spec: &ResourceSpec,
    cluster: &ClusterSpec,
) -> Result<(), SpecViolation> {
    if !spec.num_cpus.is_finite() || !spec.num_gpus.is_finite() {
        return Err(SpecViolation::NonFinite);
    }
    if spec.num_cpus < 0.0 || spec.num_gpus < 0.0 {
        return Err(SpecViolation::NonFinite);
    }
    if spec.num_gpus > 1.0 {
        return Err(SpecViolation::GpuFractionOutOfRange(spec.num_gpus));
    }
    if spec.num_cpus > cluster.cpu_cores {
        return Err(SpecViolation::CpuExceedsCapacity {
            demand: spec.num_cpus,
            capacity: cluster.cpu_cores,
        });
    }
    if spec.num_gpus > 0.0 {
        if cluster.gpus.is_empty() {
            return Err(SpecViolation::NoGpuDevices);
        }
        let largest = cluster.max_device_vram_mb();
        if spec.vram_mb > largest {
            return Err(SpecViolation::VramExceedsDevice {
                demand: spec.vram_mb,
                largest,
            });
        }
    }
    Ok(())
}

/// One timestamped profiler reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UsageSample {
    /// Simulated seconds.
    pub t: f64,
    /// CPU load in `[0, 100]` of the client's allocated core-set.
    pub cpu_pct: f64,
    pub ram_mb: u64,
    /// GPU compute utilisation in `[0, 100]`.
    pub gpu_pct: f64,
    pub vram_mb: u64,
}

/// Per-run aggregate of a monitor's sample stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UsageSummary {
    pub peak_vram_mb: u64,
    pub mean_vram_mb: f64,
    pub peak_ram_mb: u64,
    pub mean_cpu_pct: f64,
    pub mean_gpu_pct: f64,
    /// Busy CPU time integrated from samples: sum of cpu_pct/100 * interval.
    pub cpu_time_s: f64,
    /// Busy GPU time integrated from samples.
    pub gpu_time_s: f64,
    pub n_samples: usize,
}

/// Canonical property keys reported by a client after a completed fit.
pub mod property_keys {
    pub const PEAK_VRAM_MB: &str = "peak_vram_mb";
    pub const PEAK_RAM_MB: &str = "peak_ram_mb";
    pub const MEAN_CPU_PCT: &str = "mean_cpu_pct";
    pub const MEAN_GPU_PCT: &str = "mean_gpu_pct";
    pub const CPU_TIME_S: &str = "cpu_time_s";
    pub const GPU_TIME_S: &str = "gpu_time_s";
    pub const TRAIN_DURATION_S: &str = "train_duration_s";
    pub const USES_GPU: &str = "uses_gpu";
    /// Reserved key, never populated by this system.
    pub const BATTERY_STATE: &str = "battery_state";

    /// Keys that must all be present after a completed fit.
    pub const CANONICAL: [&str; 8] = [
        PEAK_VRAM_MB,
        PEAK_RAM_MB,
        MEAN_CPU_PCT,
        MEAN_GPU_PCT,
        CPU_TIME_S,
        GPU_TIME_S,
        TRAIN_DURATION_S,
        USES_GPU,
    ];
}

/// Flat string-keyed property map a client reports to the server.
///
/// Kept open-ended so server strategies can evolve independently of
/// clients; see [`property_keys`] for the canonical entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClientProperties {
    values: BTreeMap<String, f64>,
}

impl ClientProperties {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.values.insert(key.to_owned(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    /// True once every canonical key is present with a finite,
    /// non-negative value.
    pub fn is_complete(&self) -> bool {
        property_keys::CANONICAL
            .iter()
            .all(|k| matches!(self.get(k), Some(v) if v.is_finite() && v >= 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Model parameter vector carried between clients and the server.
///
/// Dimension is fixed by the experiment config and constant across all
/// clients and rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub values: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
