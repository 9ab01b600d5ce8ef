//! Shared scalar reference traversal and spec strategies.
#![allow(dead_code)]

use std::collections::HashSet;

use membench::patterns::{
    block_geometry, ArrayConfig, GridSpec, PaddingSpec, PatternSpec, VectorSpec,
};
use proptest::prelude::*;

pub type Tuple = (u32, i64, bool, bool);

/// Walk the traversal one element at a time, marking an element redundant
/// when it was already visited.
pub fn reference(spec: &PatternSpec) -> Vec<Tuple> {
    let lanes = i64::from(spec.vector.lanes);
    let ports = spec.arrays.num_ports();
    let mut seen: HashSet<(i64, i64, i64)> = HashSet::new();
    let mut out = Vec::new();
    let mut vector = |xs: i64, y: i64, z: i64, x_ok: &dyn Fn(i64) -> bool, y_ok: bool| {
        let mut lanes_out = Vec::new();
        for l in 0..lanes {
            let x = xs + l;
            let valid = y_ok && x_ok(x);
            let redundant = valid && !seen.insert((x, y, z));
            lanes_out.push((spec.linear_index(x, y, z), valid, redundant));
        }
        for p in 0..ports {
            for &(e, v, r) in &lanes_out {
                out.push((p, e, v, r));
            }
        }
    };
    match spec.grid {
        GridSpec::OneD { n, block } => {
            let ok = |x: i64| (0..n as i64).contains(&x);
            for b in 0..n / block.csize() {
                let mut x = b as i64 * block.csize() as i64 - block.halo() as i64;
                for _ in 0..block.bsize() as i64 / lanes {
                    vector(x, 0, 0, &ok, true);
                    x += lanes;
                }
            }
        }
        GridSpec::OneHalfD {
            dimx,
            dimy,
            block_x,
        } => {
            let ok = |x: i64| (0..dimx as i64).contains(&x);
            for k in 0..dimx / block_x.csize() {
                for y in 0..dimy as i64 {
                    let x0 = k as i64 * block_x.csize() as i64 - block_x.halo() as i64;
                    for v in 0..block_x.bsize() as i64 / lanes {
                        vector(x0 + v * lanes, y, 0, &ok, true);
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
            let ok = |x: i64| (0..dimx as i64).contains(&x);
            for by in 0..dimy / block_y.csize() {
                for bx in 0..dimx / block_x.csize() {
                    for z in 0..dimz as i64 {
                        let y0 = by as i64 * block_y.csize() as i64 - block_y.halo() as i64;
                        for y in y0..y0 + block_y.bsize() as i64 {
                            let x0 = bx as i64 * block_x.csize() as i64 - block_x.halo() as i64;
                            for v in 0..block_x.bsize() as i64 / lanes {
                                let y_ok = (0..dimy as i64).contains(&y);
                                vector(x0 + v * lanes, y, z, &ok, y_ok);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn vec_of(lanes: u32) -> VectorSpec {
    VectorSpec::floats(lanes).unwrap()
}

pub fn arrays(reads: u32, writes: u32) -> ArrayConfig {
    ArrayConfig::new(reads, writes).unwrap()
}

/// (lanes, bsize multiple of lanes, halo < bsize / 2)
pub fn block_params() -> impl Strategy<Value = (u32, u64, u64)> {
    (0u32..4, 1u64..5).prop_flat_map(|(lp, mult)| {
        let lanes = 1u32 << lp;
        let bsize = u64::from(lanes) * mult * 4;
        (Just(lanes), Just(bsize), 0..bsize.div_ceil(2))
    })
}

pub fn arb_arrays() -> impl Strategy<Value = ArrayConfig> {
    (0u32..3, 0u32..3)
        .prop_filter("at least one array", |(r, w)| r + w > 0)
        .prop_map(|(r, w)| arrays(r, w))
}

pub fn arb_1d() -> impl Strategy<Value = PatternSpec> {
    (block_params(), 1u64..5, 0u64..20, arb_arrays()).prop_map(
        |((lanes, bsize, halo), blocks, pad, arrays)| {
            let block = block_geometry(bsize, halo).unwrap();
            PatternSpec {
                grid: GridSpec::OneD {
                    n: blocks * block.csize(),
                    block,
                },
                padding: PaddingSpec::leading(pad),
                vector: vec_of(lanes),
                arrays,
            }
        },
    )
}

pub fn arb_15d() -> impl Strategy<Value = PatternSpec> {
    (
        block_params(),
        1u64..4,
        1u64..5,
        0u64..9,
        0u64..5,
        arb_arrays(),
    )
        .prop_map(|((lanes, bsize, halo), bx, dimy, pad, row_pad, arrays)| {
            let block = block_geometry(bsize, halo).unwrap();
            PatternSpec {
                grid: GridSpec::OneHalfD {
                    dimx: bx * block.csize(),
                    dimy,
                    block_x: block,
                },
                padding: PaddingSpec {
                    pad,
                    row_pad,
                    plane_pad: 0,
                },
                vector: vec_of(lanes),
                arrays,
            }
        })
}

pub fn arb_25d() -> impl Strategy<Value = PatternSpec> {
    (
        block_params(),
        (1u64..4, 1u64..4),
        (2u64..9, 0u64..3, 1u64..4),
        0u64..9,
        arb_arrays(),
    )
        .prop_flat_map(
            |((lanes, bsize, halo), (bx, by), (bys, hy, dimz), pad, arrays)| {
                let hy = hy.min((bys - 1) / 2);
                (
                    Just((lanes, bsize, halo, bx, by, bys, hy, dimz, pad, arrays)),
                    0u64..3,
                    0u64..5,
                )
            },
        )
        .prop_map(
            |((lanes, bsize, halo, bx, by, bys, hy, dimz, pad, arrays), row_pad, plane_pad)| {
                let block_x = block_geometry(bsize, halo).unwrap();
                let block_y = block_geometry(bys, hy).unwrap();
                PatternSpec {
                    grid: GridSpec::TwoHalfD {
                        dimx: bx * block_x.csize(),
                        dimy: by * block_y.csize(),
                        dimz,
                        block_x,
                        block_y,
                    },
                    padding: PaddingSpec {
                        pad,
                        row_pad,
                        plane_pad,
                    },
                    vector: vec_of(lanes),
                    arrays,
                }
            },
        )
}

pub fn arb_spec() -> impl Strategy<Value = PatternSpec> {
    prop_oneof![arb_1d(), arb_15d(), arb_25d()]
}
