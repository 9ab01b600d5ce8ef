//! Transaction-level model of a banked external-memory interface.
//!
//! A vector access is split into one transaction per bus word it touches.
//! There is no realignment and no coalescing across accesses, so an access
//! that straddles a word boundary costs two bank slots. Each bank retires one
//! transaction per controller cycle and pays a fixed dead time whenever it
//! switches between reads and writes.
//!
//! Time advances on a common integer picosecond base. Kernel cycles issue one
//! group of accesses (one per port) into per-port queues; issue stalls while
//! any queue lacks room for its port's transactions.

use std::collections::VecDeque;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::expected_throughput;
use crate::patterns::{AccessStream, Direction, Port};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MemError {
    #[error("invalid memory config: {0}")]
    InvalidConfig(String),
    #[error("kernel frequency must be positive, got {0} MHz")]
    InvalidFrequency(f64),
    #[error("manual banking needs a bank for port {0}")]
    MissingAssignment(u32),
    #[error("port {port} assigned to bank {bank}, but only {num_banks} banks exist")]
    BankOutOfRange {
        port: u32,
        bank: u32,
        num_banks: u32,
    },
    #[error("bank assignment covers {assigned} ports, stream has {ports}")]
    PortMismatch { assigned: usize, ports: u32 },
    #[error("stream has no slots")]
    EmptyStream,
    #[error("an access can span {words} bus words but port queues hold only {depth}")]
    QueueTooShallow { words: u64, depth: u32 },
}

pub type Result<T, E = MemError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemConfig {
    pub num_banks: u32,
    pub bank_data_bits: u32,
    /// Mega-transfers per second on each bank's data bus.
    pub transfer_rate_mts: f64,
    /// Controller clock = transfer rate / divisor.
    pub ctrl_divisor: u32,
    pub interleave: bool,
    pub interleave_granule_bytes: u64,
    /// Calibration knob, not a device constant.
    pub rw_turnaround_ctrl_cycles: u32,
    pub port_queue_depth: u32,
}

impl Default for MemConfig {
    fn default() -> Self {
        Self {
            num_banks: 2,
            bank_data_bits: 64,
            transfer_rate_mts: 2133.333,
            ctrl_divisor: 8,
            interleave: true,
            interleave_granule_bytes: 1024,
            rw_turnaround_ctrl_cycles: 2,
            port_queue_depth: 8,
        }
    }
}

impl MemConfig {
    /// Default board with manual (non-interleaved) banking.
    pub fn manual() -> Self {
        Self {
            interleave: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(MemError::InvalidConfig(m.to_string()));
        if self.num_banks == 0 {
            return bad("num_banks must be positive");
        }
        if self.bank_data_bits == 0 {
            return bad("bank_data_bits must be positive");
        }
        if !(self.transfer_rate_mts.is_finite() && self.transfer_rate_mts > 0.0) {
            return bad("transfer_rate_mts must be positive");
        }
        if self.ctrl_divisor == 0 {
            return bad("ctrl_divisor must be positive");
        }
        if self.port_queue_depth == 0 {
            return bad("port_queue_depth must be positive");
        }
        let bits = u64::from(self.bank_data_bits) * u64::from(self.ctrl_divisor);
        if bits % 8 != 0 || !(bits / 8).is_power_of_two() {
            return bad(
                "bus word (bank_data_bits x ctrl_divisor / 8) must be a power of two bytes",
            );
        }
        let word = bits / 8;
        if self.interleave_granule_bytes == 0 || !self.interleave_granule_bytes.is_multiple_of(word)
        {
            return bad("interleave_granule_bytes must be a positive multiple of the bus word");
        }
        Ok(())
    }

    /// Bytes one bank delivers per controller cycle.
    pub fn bus_word_bytes(&self) -> u64 {
        u64::from(self.bank_data_bits) * u64::from(self.ctrl_divisor) / 8
    }

    pub fn ctrl_mhz(&self) -> f64 {
        self.transfer_rate_mts / f64::from(self.ctrl_divisor)
    }

    /// Peak of a single bank in GB/s.
    pub fn bank_peak_gbps(&self) -> f64 {
        f64::from(self.bank_data_bits) / 8.0 * self.transfer_rate_mts * 1e6 / 1e9
    }

    pub fn peak_gbps(&self) -> f64 {
        f64::from(self.num_banks) * self.bank_peak_gbps()
    }
}

/// Theoretical peak of all banks, GB/s.
pub fn peak_bandwidth(cfg: &MemConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(cfg.peak_gbps())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub f_kernel_mhz: f64,
}

impl KernelConfig {
    pub fn new(f_kernel_mhz: f64) -> Result<Self> {
        if !(f_kernel_mhz.is_finite() && f_kernel_mhz > 0.0) {
            return Err(MemError::InvalidFrequency(f_kernel_mhz));
        }
        Ok(Self { f_kernel_mhz })
    }
}

/// Port → bank map used when interleaving is off.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankAssignment {
    banks: Vec<u32>,
}

impl BankAssignment {
    pub fn new(banks: Vec<u32>) -> Self {
        Self { banks }
    }

    /// Port `i` goes to bank `i mod num_banks` (reads first, then writes).
    pub fn round_robin(num_ports: u32, num_banks: u32) -> Self {
        Self {
            banks: (0..num_ports).map(|p| p % num_banks.max(1)).collect(),
        }
    }

    pub fn bank_of(&self, port: u32) -> Option<u32> {
        self.banks.get(port as usize).copied()
    }

    pub fn len(&self) -> usize {
        self.banks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.banks.is_empty()
    }

    pub fn validate(&self, num_ports: u32, cfg: &MemConfig) -> Result<()> {
        if self.banks.len() != num_ports as usize {
            return Err(MemError::PortMismatch {
                assigned: self.banks.len(),
                ports: num_ports,
            });
        }
        for (port, &bank) in self.banks.iter().enumerate() {
            if bank >= cfg.num_banks {
                return Err(MemError::BankOutOfRange {
                    port: port as u32,
                    bank,
                    num_banks: cfg.num_banks,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transaction {
    pub bank: u32,
    pub word: i64,
    pub dir: Direction,
}

/// Port width after the compiler's power-of-two rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortWidth {
    pub requested: u32,
    pub rounded: u32,
    pub masked_fraction: f64,
}

pub fn round_port_width(lanes: u32) -> PortWidth {
    let rounded = lanes.max(1).next_power_of_two();
    PortWidth {
        requested: lanes,
        rounded,
        masked_fraction: 1.0 - f64::from(lanes) / f64::from(rounded),
    }
}

/// Bus words touched by `[byte_addr, byte_addr + access_bytes)`.
pub fn split_access(byte_addr: i64, access_bytes: u64, cfg: &MemConfig) -> Range<i64> {
    let word = cfg.bus_word_bytes() as i64;
    let first = byte_addr.div_euclid(word);
    let last = (byte_addr + access_bytes.max(1) as i64 - 1).div_euclid(word);
    first..last + 1
}

pub fn map_word_to_bank(
    word: i64,
    port: u32,
    cfg: &MemConfig,
    assignment: Option<&BankAssignment>,
) -> Result<u32> {
    if cfg.interleave {
        let byte = word * cfg.bus_word_bytes() as i64;
        let granule = byte.div_euclid(cfg.interleave_granule_bytes as i64);
        Ok(granule.rem_euclid(i64::from(cfg.num_banks)) as u32)
    } else {
        assignment
            .and_then(|a| a.bank_of(port))
            .ok_or(MemError::MissingAssignment(port))
    }
}

/// Smallest vector width at which `num_ports` ports, issuing once per
/// controller cycle, can demand the full peak bandwidth.
pub fn saturation_lanes(cfg: &MemConfig, num_ports: u32, elem_bytes: u32) -> u32 {
    let peak_bytes_per_ctrl = u64::from(cfg.num_banks) * cfg.bus_word_bytes();
    let per_lane = u64::from(num_ports.max(1)) * u64::from(elem_bytes.max(1));
    peak_bytes_per_ctrl.div_ceil(per_lane) as u32
}

/// Clock period in integer picoseconds.
pub fn period_ps(f_mhz: f64) -> u64 {
    (1e6 / f_mhz).round().max(1.0) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub kernel_cycles: u64,
    pub wall_ps: u64,
    pub wall_ns: f64,
    pub transactions: u64,
    pub effective_bytes: u64,
    pub bus_bytes: u64,
    pub gbps_effective: f64,
    pub gbps_bus: f64,
    pub expected_gbps: f64,
    pub peak_gbps: f64,
    pub efficiency_vs_expected: f64,
    pub efficiency_vs_peak: f64,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    bank: u32,
}

struct PortState {
    dir: Direction,
    base: i64,
    queue: VecDeque<Pending>,
    served_at: u64,
}

#[derive(Default)]
struct BankState {
    current: Option<usize>,
    burst: u32,
    last_dir: Option<Direction>,
    ready_at: u64,
    rr_next: usize,
}

/// Run `stream` through the model.
///
/// Arbitration is round-robin over the ports sharing a bank, at burst
/// granularity: a granted port keeps the bank for up to `port_queue_depth`
/// consecutive retirements while it has work there. A port retires at most
/// one transaction per controller cycle, and always from the head of its
/// queue, so an interleaved port occupies one bank at a time.
pub fn simulate(
    stream: &AccessStream,
    kernel: &KernelConfig,
    cfg: &MemConfig,
    assignment: Option<&BankAssignment>,
) -> Result<SimResult> {
    cfg.validate()?;
    KernelConfig::new(kernel.f_kernel_mhz)?;
    let spec = stream.spec();
    let nports = stream.num_ports();
    if stream.num_slots() == 0 {
        return Err(MemError::EmptyStream);
    }
    let default_assignment;
    let assignment = if cfg.interleave {
        None
    } else {
        let a = match assignment {
            Some(a) => a,
            None => {
                default_assignment = BankAssignment::round_robin(nports, cfg.num_banks);
                &default_assignment
            }
        };
        a.validate(nports, cfg)?;
        Some(a)
    };

    let word = cfg.bus_word_bytes();
    let access_bytes =
        u64::from(round_port_width(spec.vector.lanes).rounded) * u64::from(spec.vector.elem_bytes);
    let worst_words = (access_bytes + word - 2) / word + 1;
    if worst_words > u64::from(cfg.port_queue_depth) {
        return Err(MemError::QueueTooShallow {
            words: worst_words,
            depth: cfg.port_queue_depth,
        });
    }

    // Interleaved arrays live back to back, each region a whole number of
    // interleave periods plus one guard period for negative halo indexes.
    let period = cfg.interleave_granule_bytes * u64::from(cfg.num_banks);
    let span = spec.span_elems() * u64::from(spec.vector.elem_bytes);
    let region = (span.div_ceil(period) + 1) * period;
    let mut ports: Vec<PortState> = spec
        .arrays
        .ports()
        .map(|Port { index, dir }| PortState {
            dir,
            base: if cfg.interleave {
                (u64::from(index) * region + period) as i64
            } else {
                0
            },
            queue: VecDeque::with_capacity(cfg.port_queue_depth as usize),
            served_at: u64::MAX,
        })
        .collect();
    let mut banks: Vec<BankState> = (0..cfg.num_banks).map(|_| BankState::default()).collect();

    let tk = period_ps(kernel.f_kernel_mhz);
    let tc = period_ps(cfg.ctrl_mhz());
    let depth = cfg.port_queue_depth as usize;
    let burst_limit = cfg.port_queue_depth;
    let turnaround = u64::from(cfg.rw_turnaround_ctrl_cycles);

    let total = stream.num_slots();
    let mut next_slot = 0u64;
    let mut kernel_edges = 0u64;
    let mut ctrl_cycle = 0u64;
    let mut in_flight = 0usize;
    let mut last_retire_ps = 0u64;
    let mut last_issue_ps = 0u64;
    let mut transactions = 0u64;
    let mut effective = 0u64;
    let eb = u64::from(spec.vector.elem_bytes);
    let mut words: Vec<Range<i64>> = vec![0..0; nports as usize];

    while next_slot < total || in_flight > 0 {
        let t_ctrl = ctrl_cycle * tc;
        let t_kernel = kernel_edges * tk;
        if next_slot >= total || t_ctrl <= t_kernel {
            // controller edge
            for (b, bank) in banks.iter_mut().enumerate() {
                if ctrl_cycle < bank.ready_at {
                    continue;
                }
                let eligible = |p: usize, ports: &[PortState]| {
                    let ps = &ports[p];
                    ps.served_at != ctrl_cycle
                        && ps.queue.front().is_some_and(|h| h.bank as usize == b)
                };
                let keep = bank
                    .current
                    .filter(|&p| bank.burst < burst_limit && eligible(p, &ports));
                let chosen = keep.or_else(|| {
                    let n = ports.len();
                    let found = (0..n)
                        .map(|i| (bank.rr_next + i) % n)
                        .find(|&p| eligible(p, &ports));
                    if let Some(p) = found {
                        bank.rr_next = (p + 1) % n;
                        bank.burst = 0;
                    }
                    found
                });
                bank.current = chosen;
                let Some(p) = chosen else { continue };
                let dir = ports[p].dir;
                if turnaround > 0 && bank.last_dir.is_some_and(|d| d != dir) {
                    bank.last_dir = Some(dir);
                    bank.ready_at = ctrl_cycle + turnaround;
                    continue;
                }
                bank.last_dir = Some(dir);
                bank.burst += 1;
                ports[p].queue.pop_front();
                ports[p].served_at = ctrl_cycle;
                in_flight -= 1;
                last_retire_ps = t_ctrl;
            }
            ctrl_cycle += 1;
        } else {
            // kernel edge
            let slot = stream.slot(next_slot);
            let fits = if slot.is_skipped() {
                true
            } else {
                let byte_addr = spec.byte_addr(slot.elem_index);
                ports.iter().zip(words.iter_mut()).all(|(ps, w)| {
                    *w = split_access(ps.base + byte_addr, access_bytes, cfg);
                    ps.queue.len() + (w.end - w.start) as usize <= depth
                })
            };
            if fits {
                if !slot.is_skipped() {
                    for (p, ps) in ports.iter_mut().enumerate() {
                        for wd in words[p].clone() {
                            let bank = map_word_to_bank(wd, p as u32, cfg, assignment)?;
                            ps.queue.push_back(Pending { bank });
                            in_flight += 1;
                            transactions += 1;
                        }
                    }
                    effective += u64::from(slot.valid_lanes()) * eb * u64::from(nports);
                }
                next_slot += 1;
                last_issue_ps = t_kernel;
            }
            kernel_edges += 1;
        }
    }

    let wall_ps = (last_issue_ps + tk).max(if transactions > 0 {
        last_retire_ps + tc
    } else {
        0
    });
    let bus_bytes = transactions * word;
    let gbps = |bytes: u64| bytes as f64 / wall_ps as f64 * 1e3;
    let gbps_effective = gbps(effective);
    let peak = cfg.peak_gbps();
    let expected = expected_throughput(
        nports,
        spec.vector.lanes,
        kernel.f_kernel_mhz,
        spec.vector.elem_bytes,
    );
    Ok(SimResult {
        kernel_cycles: kernel_edges,
        wall_ps,
        wall_ns: wall_ps as f64 / 1e3,
        transactions,
        effective_bytes: effective,
        bus_bytes,
        gbps_effective,
        gbps_bus: gbps(bus_bytes),
        expected_gbps: expected,
        peak_gbps: peak,
        efficiency_vs_expected: gbps_effective / expected.min(peak),
        efficiency_vs_peak: gbps_effective / peak,
    })
}
