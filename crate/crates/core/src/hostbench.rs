//! Host-memory backend: replays a generated stream against real buffers with
//! wall-clock timing and verifies the written data.
//!
//! Every write array receives, at each valid index, the sum of all read
//! arrays at that index (or a seeded constant when there are no reads).
//! Overlapped blocks rewrite the same values, so the final buffers are
//! independent of traversal order and can be checked against a scalar
//! reference. Read-only configurations fold the loaded values into a
//! wrapping checksum instead.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::patterns::{AccessStream, GridSpec, PatternError, PatternSpec, Slot};

#[derive(Debug, Error)]
pub enum HostError {
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("could not allocate {bytes} bytes")]
    Allocation { bytes: u64 },
    #[error("buffer alignment must be a power of two multiple of the element size, got {0}")]
    BadAlignment(usize),
    #[error("host backend stores 4-byte elements, got {0}")]
    UnsupportedElement(u32),
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error(
        "checksum mismatch in write array {buffer} at element {elem_index}: expected {expected}, found {found}"
    )]
    Mismatch {
        buffer: usize,
        elem_index: i64,
        expected: f32,
        found: f32,
    },
    #[error("read checksum mismatch: expected {expected:#x}, found {found:#x}")]
    ReadChecksum { expected: u64, found: u64 },
    #[error("checksum changed between repetitions")]
    Unstable,
    #[error("could not pin to core {core}: {source}")]
    Pin { core: usize, source: std::io::Error },
}

#[derive(Debug, Clone)]
pub struct HostRunSpec {
    pub pattern: PatternSpec,
    pub repetitions: u32,
    pub warmup: u32,
    pub buffer_align: usize,
    /// Use non-temporal stores where the target supports them.
    pub streaming_stores: bool,
    /// Worker threads. Only sequential (halo 0) 1D streams are split; other
    /// patterns always run on one thread.
    pub threads: usize,
    pub pin_core: Option<usize>,
}

impl HostRunSpec {
    pub fn new(pattern: PatternSpec) -> Self {
        Self {
            pattern,
            repetitions: 3,
            warmup: 1,
            buffer_align: 64,
            streaming_stores: false,
            threads: 1,
            pin_core: None,
        }
    }
}

/// Heap buffer whose first element sits on a requested byte boundary.
#[derive(Debug, Clone)]
pub struct AlignedBuf {
    storage: Vec<f32>,
    offset: usize,
    len: usize,
}

impl AlignedBuf {
    pub fn zeroed(len: usize, align: usize) -> Result<Self, HostError> {
        let elem = std::mem::size_of::<f32>();
        if !align.is_power_of_two() || align < elem {
            return Err(HostError::BadAlignment(align));
        }
        let extra = align / elem;
        let total = len + extra;
        let mut storage = Vec::new();
        storage
            .try_reserve_exact(total)
            .map_err(|_| HostError::Allocation {
                bytes: (total * elem) as u64,
            })?;
        storage.resize(total, 0.0);
        let offset = storage.as_ptr().align_offset(align);
        if offset > extra {
            return Err(HostError::BadAlignment(align));
        }
        Ok(Self {
            storage,
            offset,
            len,
        })
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.storage[self.offset..self.offset + self.len]
    }

    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.storage[self.offset..self.offset + self.len]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HostResult {
    pub wall_ns: Vec<u64>,
    /// Valid bytes moved per repetition, redundant accesses included.
    pub effective_bytes: u64,
    pub best_gbps: f64,
    pub median_gbps: f64,
    pub checksum: u64,
    /// Checksum after every measured repetition.
    pub checksums: Vec<u64>,
    pub threads_used: usize,
    #[serde(skip)]
    pub outputs: Vec<AlignedBuf>,
}

/// Value stored in read array `array` at padded buffer index `j`.
pub fn seed_value(array: u32, j: usize) -> f32 {
    let h = (j as u64)
        .wrapping_mul(2_654_435_761)
        .wrapping_add(u64::from(array) * 97);
    (h % 1024) as f32 * 0.5
}

const WRITE_ONLY_SEED: u32 = 255;

fn fold(acc: u64, value: f32) -> u64 {
    acc.wrapping_add(u64::from(value.to_bits()))
}

fn buffers_checksum(outputs: &[AlignedBuf]) -> u64 {
    outputs.iter().enumerate().fold(0u64, |acc, (w, buf)| {
        buf.as_slice().iter().enumerate().fold(acc, |acc, (j, v)| {
            let k = (j as u64 + 1).wrapping_mul(w as u64 * 7919 + 1);
            acc.wrapping_add(u64::from(v.to_bits()).wrapping_mul(k))
        })
    })
}

/// Scalar model of the expected outcome.
#[derive(Debug, Clone)]
pub struct Reference {
    spec: PatternSpec,
    read_checksum: u64,
}

impl Reference {
    /// Build the reference with an independent lane-by-lane traversal.
    pub fn new(spec: &PatternSpec) -> Self {
        let mut read_checksum = 0u64;
        if spec.arrays.writes == 0 {
            let pad = spec.padding.pad as i64;
            for_each_valid_visit(spec, |e| {
                let j = (pad + e) as usize;
                let v: f32 = (0..spec.arrays.reads).map(|r| seed_value(r, j)).sum();
                read_checksum = fold(read_checksum, v);
            });
        }
        Self {
            spec: *spec,
            read_checksum,
        }
    }

    /// Expected value of any write array at padded buffer index `j`.
    pub fn expected(&self, j: usize) -> f32 {
        let e = j as i64 - self.spec.padding.pad as i64;
        if !self.spec.in_domain(e) {
            return 0.0;
        }
        if self.spec.arrays.reads == 0 {
            seed_value(WRITE_ONLY_SEED, j)
        } else {
            (0..self.spec.arrays.reads).map(|r| seed_value(r, j)).sum()
        }
    }

    pub fn checksum(&self) -> u64 {
        if self.spec.arrays.writes == 0 {
            return self.read_checksum;
        }
        let span = self.spec.span_elems() as usize;
        let mut acc = 0u64;
        for w in 0..self.spec.arrays.writes as u64 {
            for j in 0..span {
                let k = (j as u64 + 1).wrapping_mul(w * 7919 + 1);
                acc = acc.wrapping_add(u64::from(self.expected(j).to_bits()).wrapping_mul(k));
            }
        }
        acc
    }
}

/// Visit every valid lane of the traversal in issue order, one element at a
/// time, straight from the block geometry.
pub fn for_each_valid_visit(spec: &PatternSpec, mut visit: impl FnMut(i64)) {
    match spec.grid {
        GridSpec::OneD { n, block } => {
            for b in 0..n / block.csize() {
                for i in 0..block.bsize() as i64 {
                    let x = block.start(b) + i;
                    if (0..n as i64).contains(&x) {
                        visit(x);
                    }
                }
            }
        }
        GridSpec::OneHalfD {
            dimx,
            dimy,
            block_x,
        } => {
            for k in 0..dimx / block_x.csize() {
                for y in 0..dimy as i64 {
                    for i in 0..block_x.bsize() as i64 {
                        let x = block_x.start(k) + i;
                        if (0..dimx as i64).contains(&x) {
                            visit(spec.linear_index(x, y, 0));
                        }
                    }
                }
            }
        }
        GridSpec::TwoHalfD {
            dimx,
            dimy,
            dimz,
            block_x,
            block_y,
        } => {
            for by in 0..dimy / block_y.csize() {
                for bx in 0..dimx / block_x.csize() {
                    for z in 0..dimz as i64 {
                        for j in 0..block_y.bsize() as i64 {
                            let y = block_y.start(by) + j;
                            if !(0..dimy as i64).contains(&y) {
                                continue;
                            }
                            for i in 0..block_x.bsize() as i64 {
                                let x = block_x.start(bx) + i;
                                if (0..dimx as i64).contains(&x) {
                                    visit(spec.linear_index(x, y, z));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Compare the run's write buffers and checksum against the reference.
pub fn verify_checksum(result: &HostResult, reference: &Reference) -> Result<(), HostError> {
    let pad = reference.spec.padding.pad as i64;
    for (w, buf) in result.outputs.iter().enumerate() {
        for (j, &found) in buf.as_slice().iter().enumerate() {
            let expected = reference.expected(j);
            if found.to_bits() != expected.to_bits() {
                return Err(HostError::Mismatch {
                    buffer: w,
                    elem_index: j as i64 - pad,
                    expected,
                    found,
                });
            }
        }
    }
    if reference.spec.arrays.writes == 0 && result.checksum != reference.read_checksum {
        return Err(HostError::ReadChecksum {
            expected: reference.read_checksum,
            found: result.checksum,
        });
    }
    Ok(())
}

#[cfg(target_arch = "x86_64")]
fn stream_store(dst: &mut [f32], src: &[f32]) {
    use std::arch::x86_64::_mm_stream_si32;
    for (d, s) in dst.iter_mut().zip(src) {
        // SAFETY: `d` is a valid, aligned, exclusive reference to an f32, which
        // has the size and alignment of i32; SSE2 is baseline on x86_64.
        unsafe { _mm_stream_si32((d as *mut f32).cast::<i32>(), s.to_bits() as i32) };
    }
}

#[cfg(not(target_arch = "x86_64"))]
fn stream_store(dst: &mut [f32], src: &[f32]) {
    dst.copy_from_slice(src);
}

fn store_fence() {
    #[cfg(target_arch = "x86_64")]
    // SAFETY: sfence has no memory-safety preconditions.
    unsafe {
        std::arch::x86_64::_mm_sfence()
    };
}

#[cfg(target_os = "linux")]
fn pin_to_core(core: usize) -> std::io::Result<()> {
    // SAFETY: cpu_set_t is plain data; zeroed is a valid empty set and the
    // pointer passed to sched_setaffinity refers to it for the whole call.
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_SET(core, &mut set);
        if libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) != 0 {
            return Err(std::io::Error::last_os_error());
        }
    }
    Ok(())
}

#[cfg(not(target_os = "linux"))]
fn pin_to_core(_core: usize) -> std::io::Result<()> {
    Err(std::io::Error::new(
        std::io::ErrorKind::Unsupported,
        "core pinning is only implemented on Linux",
    ))
}

struct Kernel<'a> {
    reads: &'a [AlignedBuf],
    pad: i64,
    lanes: usize,
    streaming: bool,
    scratch: Vec<f32>,
}

impl Kernel<'_> {
    /// Execute one slot across all ports; returns (valid lanes, read fold).
    fn slot(&mut self, slot: &Slot, outs: &mut [&mut [f32]], base: usize, acc: u64) -> (u64, u64) {
        if slot.is_skipped() {
            return (0, acc);
        }
        let start = self.pad + slot.elem_index;
        let full_mask = if self.lanes == 64 {
            u64::MAX
        } else {
            (1u64 << self.lanes) - 1
        };
        let mut acc = acc;
        if slot.valid_mask == full_mask {
            let j = start as usize;
            let mut scratch = std::mem::take(&mut self.scratch);
            let vals = &mut scratch[..self.lanes];
            self.fill(j, vals);
            let vals = &*vals;
            for out in outs.iter_mut() {
                let dst = &mut out[j - base..j - base + self.lanes];
                if self.streaming {
                    stream_store(dst, vals);
                } else {
                    dst.copy_from_slice(vals);
                }
            }
            if outs.is_empty() {
                acc = vals.iter().fold(acc, |a, &v| fold(a, v));
            }
            self.scratch = scratch;
        } else {
            for lane in 0..self.lanes {
                if slot.valid_mask >> lane & 1 == 0 {
                    continue;
                }
                let j = (start + lane as i64) as usize;
                let v = self.value(j);
                for out in outs.iter_mut() {
                    out[j - base] = v;
                }
                if outs.is_empty() {
                    acc = fold(acc, v);
                }
            }
        }
        (u64::from(slot.valid_lanes()), acc)
    }

    fn fill(&self, j: usize, vals: &mut [f32]) {
        match self.reads.split_first() {
            None => {
                for (l, v) in vals.iter_mut().enumerate() {
                    *v = seed_value(WRITE_ONLY_SEED, j + l);
                }
            }
            Some((first, rest)) => {
                vals.copy_from_slice(&first.as_slice()[j..j + vals.len()]);
                let n = vals.len();
                for r in rest {
                    for (v, s) in vals.iter_mut().zip(&r.as_slice()[j..j + n]) {
                        *v += *s;
                    }
                }
            }
        }
    }

    fn value(&self, j: usize) -> f32 {
        if self.reads.is_empty() {
            seed_value(WRITE_ONLY_SEED, j)
        } else {
            self.reads.iter().map(|r| r.as_slice()[j]).sum()
        }
    }
}

fn run_rep(
    stream: &AccessStream,
    reads: &[AlignedBuf],
    outputs: &mut [AlignedBuf],
    streaming: bool,
    threads: usize,
) -> (u64, u64) {
    let spec = stream.spec();
    let lanes = spec.vector.lanes as usize;
    let ports = u64::from(spec.arrays.num_ports());
    let make_kernel = || Kernel {
        reads,
        pad: spec.padding.pad as i64,
        lanes,
        streaming,
        scratch: vec![0.0; lanes],
    };

    let total = stream.num_slots();
    let (valid, acc) = if threads > 1 {
        // Sequential 1D: slot c covers buffer indexes pad + c*lanes ..
        let per = total.div_ceil(threads as u64);
        let pad = spec.padding.pad as usize;
        let mut tails: Vec<&mut [f32]> = outputs.iter_mut().map(|b| b.as_mut_slice()).collect();
        let mut jobs = Vec::new();
        for t in 0..threads as u64 {
            let (lo, hi) = (t * per, ((t + 1) * per).min(total));
            if lo >= hi {
                break;
            }
            let base = pad + (lo as usize) * lanes;
            let len = ((hi - lo) as usize) * lanes;
            let mut mine = Vec::with_capacity(tails.len());
            let mut rest = Vec::with_capacity(tails.len());
            for tail in tails {
                let skip = if t == 0 { base } else { 0 };
                let (_, from) = tail.split_at_mut(skip);
                let (chunk, after) = from.split_at_mut(len);
                mine.push(chunk);
                rest.push(after);
            }
            tails = rest;
            jobs.push((lo, hi, base, mine));
        }
        std::thread::scope(|s| {
            let handles: Vec<_> = jobs
                .into_iter()
                .map(|(lo, hi, base, mut chunks)| {
                    let mut kernel = make_kernel();
                    s.spawn(move || {
                        let mut valid = 0u64;
                        let mut acc = 0u64;
                        for slot in stream.slot_range(lo, hi) {
                            let (v, a) = kernel.slot(&slot, &mut chunks, base, acc);
                            valid += v;
                            acc = a;
                        }
                        (valid, acc)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("host worker panicked"))
                .fold((0u64, 0u64), |(v, a), (v2, a2)| {
                    (v + v2, a.wrapping_add(a2))
                })
        })
    } else {
        let mut kernel = make_kernel();
        let mut outs: Vec<&mut [f32]> = outputs.iter_mut().map(|b| b.as_mut_slice()).collect();
        let mut valid = 0u64;
        let mut acc = 0u64;
        for slot in stream.slots() {
            let (v, a) = kernel.slot(&slot, &mut outs, 0, acc);
            valid += v;
            acc = a;
        }
        (valid, acc)
    };
    if streaming {
        store_fence();
    }
    (valid * ports * u64::from(spec.vector.elem_bytes), acc)
}

pub fn run_host(spec: &HostRunSpec) -> Result<HostResult, HostError> {
    if spec.repetitions == 0 {
        return Err(HostError::NoRepetitions);
    }
    let pattern = &spec.pattern;
    if pattern.vector.elem_bytes != 4 {
        return Err(HostError::UnsupportedElement(pattern.vector.elem_bytes));
    }
    let stream = AccessStream::new(*pattern)?;
    if let Some(core) = spec.pin_core {
        pin_to_core(core).map_err(|source| HostError::Pin { core, source })?;
    }
    let span = pattern.span_elems() as usize;
    let reads = (0..pattern.arrays.reads)
        .map(|r| {
            let mut b = AlignedBuf::zeroed(span, spec.buffer_align)?;
            for (j, v) in b.as_mut_slice().iter_mut().enumerate() {
                *v = seed_value(r, j);
            }
            Ok(b)
        })
        .collect::<Result<Vec<_>, HostError>>()?;
    let mut outputs = (0..pattern.arrays.writes)
        .map(|_| AlignedBuf::zeroed(span, spec.buffer_align))
        .collect::<Result<Vec<_>, HostError>>()?;

    let splittable = matches!(pattern.grid, GridSpec::OneD { block, .. } if block.halo() == 0);
    let threads = if splittable { spec.threads.max(1) } else { 1 };

    for _ in 0..spec.warmup {
        run_rep(
            &stream,
            &reads,
            &mut outputs,
            spec.streaming_stores,
            threads,
        );
    }
    let mut wall_ns = Vec::with_capacity(spec.repetitions as usize);
    let mut checksums = Vec::with_capacity(spec.repetitions as usize);
    let mut effective_bytes = 0;
    for _ in 0..spec.repetitions {
        let t0 = Instant::now();
        let (bytes, acc) = run_rep(
            &stream,
            &reads,
            &mut outputs,
            spec.streaming_stores,
            threads,
        );
        let ns = t0.elapsed().as_nanos().max(1) as u64;
        wall_ns.push(ns);
        effective_bytes = bytes;
        checksums.push(if outputs.is_empty() {
            acc
        } else {
            buffers_checksum(&outputs)
        });
    }
    if checksums.windows(2).any(|w| w[0] != w[1]) {
        return Err(HostError::Unstable);
    }

    let mut rates: Vec<f64> = wall_ns
        .iter()
        .map(|&ns| effective_bytes as f64 / ns as f64)
        .collect();
    rates.sort_by(|a, b| a.total_cmp(b));
    let best_gbps = *rates.last().expect("at least one repetition");
    let mid = rates.len() / 2;
    let median_gbps = if rates.len() % 2 == 1 {
        rates[mid]
    } else {
        (rates[mid - 1] + rates[mid]) / 2.0
    };
    Ok(HostResult {
        wall_ns,
        effective_bytes,
        best_gbps,
        median_gbps,
        checksum: checksums[0],
        checksums,
        threads_used: threads,
        outputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{block_geometry, ArrayConfig, PaddingSpec, VectorSpec};

    fn spec_1d(n: u64, bsize: u64, halo: u64, pad: u64, lanes: u32, cfg: &str) -> PatternSpec {
        PatternSpec {
            grid: GridSpec::OneD {
                n,
                block: block_geometry(bsize, halo).unwrap(),
            },
            padding: PaddingSpec::leading(pad),
            vector: VectorSpec::floats(lanes).unwrap(),
            arrays: cfg.parse::<ArrayConfig>().unwrap(),
        }
    }

    fn quick(p: PatternSpec) -> HostRunSpec {
        HostRunSpec {
            repetitions: 2,
            warmup: 0,
            ..HostRunSpec::new(p)
        }
    }

    #[test]
    fn aligned_buffer() {
        for align in [4, 64, 4096] {
            let b = AlignedBuf::zeroed(10, align).unwrap();
            assert_eq!(b.as_slice().as_ptr() as usize % align, 0);
            assert_eq!(b.as_slice().len(), 10);
        }
        assert!(AlignedBuf::zeroed(10, 48).is_err());
    }

    #[test]
    fn copy_kernel_passes() {
        let p = spec_1d(1 << 14, 1024, 0, 0, 16, "R1W1");
        let r = run_host(&quick(p)).unwrap();
        assert_eq!(r.effective_bytes, 2 * (1 << 14) * 4);
        let reference = Reference::new(&p);
        verify_checksum(&r, &reference).unwrap();
        assert_eq!(r.checksum, reference.checksum());
        // copy semantics
        let src: Vec<f32> = (0..1 << 14).map(|j| seed_value(0, j)).collect();
        assert_eq!(r.outputs[0].as_slice(), &src[..]);
    }

    #[test]
    fn corrupted_element_is_located() {
        let p = spec_1d(4096, 1024, 0, 0, 16, "R1W1");
        let mut r = run_host(&quick(p)).unwrap();
        r.outputs[0].as_mut_slice()[1234] += 1.0;
        match verify_checksum(&r, &Reference::new(&p)) {
            Err(HostError::Mismatch { elem_index, .. }) => assert_eq!(elem_index, 1234),
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn overlapped_blocking_passes() {
        let p = spec_1d(992 * 8, 1024, 16, 3, 16, "R2W2");
        let r = run_host(&quick(p)).unwrap();
        verify_checksum(&r, &Reference::new(&p)).unwrap();
        let stats = AccessStream::new(p).unwrap().redundancy_stats();
        assert_eq!(r.effective_bytes, stats.effective_bytes);
    }

    #[test]
    fn read_only_checksum() {
        let p = spec_1d(1020 * 4, 1024, 2, 0, 16, "R2W0");
        let r = run_host(&quick(p)).unwrap();
        verify_checksum(&r, &Reference::new(&p)).unwrap();
        assert!(r.checksums.iter().all(|&c| c == r.checksum));
    }

    #[test]
    fn write_only_and_threads() {
        let p = spec_1d(1 << 14, 1024, 0, 16, 8, "R0W2");
        let spec = HostRunSpec {
            threads: 3,
            ..quick(p)
        };
        let r = run_host(&spec).unwrap();
        assert_eq!(r.threads_used, 3);
        verify_checksum(&r, &Reference::new(&p)).unwrap();

        let p = spec_1d(1 << 14, 1024, 0, 0, 16, "R3W1");
        let r = run_host(&HostRunSpec {
            threads: 4,
            ..quick(p)
        })
        .unwrap();
        verify_checksum(&r, &Reference::new(&p)).unwrap();
        assert!(r.best_gbps >= r.median_gbps && r.median_gbps > 0.0);
    }

    #[test]
    fn overlapped_stays_single_threaded() {
        let p = spec_1d(992 * 4, 1024, 16, 0, 16, "R1W1");
        let r = run_host(&HostRunSpec {
            threads: 4,
            ..quick(p)
        })
        .unwrap();
        assert_eq!(r.threads_used, 1);
    }

    #[test]
    fn streaming_stores_same_result() {
        let p = spec_1d(1 << 12, 1024, 0, 0, 16, "R1W1");
        let r = run_host(&HostRunSpec {
            streaming_stores: true,
            ..quick(p)
        })
        .unwrap();
        verify_checksum(&r, &Reference::new(&p)).unwrap();
    }
}
