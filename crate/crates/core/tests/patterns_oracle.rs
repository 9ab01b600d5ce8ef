//! Generated streams against a scalar lane-by-lane reference traversal.

mod common;

use common::{arb_spec, arrays, block_params, reference, vec_of, Tuple};
use membench::patterns::{block_geometry, AccessStream, GridSpec, PaddingSpec, PatternSpec};
use proptest::prelude::*;

fn generated(spec: &PatternSpec) -> Vec<Tuple> {
    AccessStream::new(*spec)
        .unwrap()
        .records()
        .map(|r| (r.port.index, r.elem_index, r.valid, r.redundant))
        .collect()
}

fn sorted(mut v: Vec<Tuple>) -> Vec<Tuple> {
    v.sort_unstable();
    v
}

#[test]
fn seam_example_1d() {
    let block = block_geometry(1024, 16).unwrap();
    let spec = PatternSpec {
        grid: GridSpec::OneD { n: 1984, block },
        padding: PaddingSpec::default(),
        vector: vec_of(16),
        arrays: arrays(1, 0),
    };
    let stream = AccessStream::new(spec).unwrap();
    let st = stream.redundancy_stats();
    assert_eq!(st.issued, 2048);
    assert_eq!(st.unique, 1984);
    assert_eq!(st.redundant, 32);
    let first = stream.slot(0);
    assert_eq!(first.elem_index, -16);
    assert_eq!(first.valid_mask, 0);
    assert_eq!(sorted(generated(&spec)), sorted(reference(&spec)));
}

#[test]
fn row_layout_15d() {
    // block k, row j starts at j*dimx + k*992 - 16
    let block = block_geometry(1024, 16).unwrap();
    let (dimx, dimy) = (992 * 3, 5);
    let spec = PatternSpec {
        grid: GridSpec::OneHalfD {
            dimx,
            dimy,
            block_x: block,
        },
        padding: PaddingSpec::default(),
        vector: vec_of(16),
        arrays: arrays(1, 1),
    };
    let s = AccessStream::new(spec).unwrap();
    let per_row = 1024 / 16;
    for k in 0..3u64 {
        for j in 0..dimy {
            let slot = s.slot((k * dimy + j) * per_row);
            assert_eq!(slot.elem_index, (j * dimx + k * 992) as i64 - 16);
        }
    }
}

#[test]
fn single_block_15d_halo_columns_invalid() {
    let block = block_geometry(1024, 16).unwrap();
    let spec = PatternSpec {
        grid: GridSpec::OneHalfD {
            dimx: 992,
            dimy: 4,
            block_x: block,
        },
        padding: PaddingSpec::default(),
        vector: vec_of(16),
        arrays: arrays(1, 0),
    };
    let st = AccessStream::new(spec).unwrap().redundancy_stats();
    assert_eq!(st.skipped, 4 * 32);
    assert_eq!(st.redundant, 0);
    assert_eq!(st.valid, 4 * 992);
}

#[test]
fn tile_width_25d() {
    let b = block_geometry(64, 16).unwrap();
    let spec = PatternSpec {
        grid: GridSpec::TwoHalfD {
            dimx: 96,
            dimy: 96,
            dimz: 2,
            block_x: b,
            block_y: b,
        },
        padding: PaddingSpec::default(),
        vector: vec_of(16),
        arrays: arrays(1, 0),
    };
    let s = AccessStream::new(spec).unwrap();
    assert_eq!(s.vecs_per_row() * 16, 64);
    let recs = reference(&spec);
    assert_eq!(sorted(generated(&spec)), sorted(recs));
    // an interior tile covers 32 new columns of a row beyond its overlap
    let st = s.redundancy_stats();
    assert_eq!(st.unique, 96 * 96 * 2);
}

#[test]
fn invalid_fraction_grows_with_halo_25d() {
    let frac = |halo| {
        let b = block_geometry(64, halo).unwrap();
        let spec = PatternSpec {
            grid: GridSpec::TwoHalfD {
                dimx: b.csize() * 4,
                dimy: b.csize() * 4,
                dimz: 1,
                block_x: b,
                block_y: b,
            },
            padding: PaddingSpec::default(),
            vector: vec_of(1),
            arrays: arrays(1, 0),
        };
        let st = AccessStream::new(spec).unwrap().redundancy_stats();
        (st.skipped + st.redundant) as f64 / st.issued as f64
    };
    let fracs: Vec<f64> = [0, 4, 8, 16, 24, 31].iter().map(|&h| frac(h)).collect();
    assert_eq!(fracs[0], 0.0);
    assert!(fracs.windows(2).all(|w| w[1] > w[0]), "{fracs:?}");
}

#[test]
fn accounting_identity_invalid_groups() {
    // one tile, 32 rows of which 16 lie outside the grid
    let b = block_geometry(32, 8).unwrap();
    let spec = PatternSpec {
        grid: GridSpec::TwoHalfD {
            dimx: 16,
            dimy: 16,
            dimz: 1,
            block_x: b,
            block_y: b,
        },
        padding: PaddingSpec::default(),
        vector: vec_of(16),
        arrays: arrays(1, 0),
    };
    let s = AccessStream::new(spec).unwrap();
    let st = s.redundancy_stats();
    assert_eq!(s.num_slots(), 64);
    assert_eq!(st.skipped_slots, 32);
    assert_eq!(st.effective_bytes, 32 * 8 * 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn records_match_reference(spec in arb_spec()) {
        prop_assert_eq!(sorted(generated(&spec)), sorted(reference(&spec)));
    }

    #[test]
    fn stats_identities(spec in arb_spec()) {
        let s = AccessStream::new(spec).unwrap();
        let st = s.redundancy_stats();
        prop_assert_eq!(st.issued, st.valid + st.skipped);
        prop_assert_eq!(st.valid, st.unique + st.redundant);
        prop_assert_eq!(st.effective_bytes, st.valid * u64::from(spec.vector.elem_bytes));
        let recs = reference(&spec);
        prop_assert_eq!(st.valid, recs.iter().filter(|r| r.2).count() as u64);
        prop_assert_eq!(st.redundant, recs.iter().filter(|r| r.3).count() as u64);
    }

    #[test]
    fn byte_offset_constant(spec in arb_spec()) {
        let eb = i64::from(spec.vector.elem_bytes);
        for r in AccessStream::new(spec).unwrap().records() {
            prop_assert_eq!(r.byte_addr - r.elem_index * eb, spec.padding.pad as i64 * eb);
        }
    }

    #[test]
    fn block_starts_step_by_csize(((lanes, bsize, halo), blocks) in (block_params(), 2u64..6)) {
        let block = block_geometry(bsize, halo).unwrap();
        let spec = PatternSpec {
            grid: GridSpec::OneD { n: blocks * block.csize(), block },
            padding: PaddingSpec::default(),
            vector: vec_of(lanes),
            arrays: arrays(1, 0),
        };
        let s = AccessStream::new(spec).unwrap();
        let per_block = bsize / u64::from(lanes);
        prop_assert_eq!(s.num_slots(), blocks * per_block);
        for b in 1..blocks {
            let d = s.slot(b * per_block).elem_index - s.slot((b - 1) * per_block).elem_index;
            prop_assert_eq!(d, block.csize() as i64);
        }
        let mut covered: Vec<i64> = s.records().filter(|r| r.valid && !r.redundant).map(|r| r.elem_index).collect();
        covered.sort_unstable();
        let expect: Vec<i64> = (0..spec.grid.domain_len() as i64).collect();
        prop_assert_eq!(covered, expect);
    }

    #[test]
    fn halo_zero_is_clean_and_aligned(lanes_pow in 0u32..6, mult in 1u64..4, blocks in 1u64..4, padk in 0u64..3) {
        let lanes = 1u32 << lanes_pow;
        let bsize = u64::from(lanes) * mult;
        let block = block_geometry(bsize, 0).unwrap();
        let spec = PatternSpec {
            grid: GridSpec::OneD { n: blocks * bsize, block },
            padding: PaddingSpec::leading(padk * u64::from(lanes)),
            vector: vec_of(lanes),
            arrays: arrays(1, 1),
        };
        let s = AccessStream::new(spec).unwrap();
        let st = s.redundancy_stats();
        prop_assert_eq!(st.skipped, 0);
        prop_assert_eq!(st.redundant, 0);
        for g in s.groups() {
            for a in g.accesses {
                prop_assert_eq!(a.byte_addr % (i64::from(lanes) * 4), 0);
            }
        }
    }
}
