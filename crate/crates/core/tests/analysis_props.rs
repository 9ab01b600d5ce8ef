use membench::analysis::{
    efficiency, halo_class, merge_advice, padding_advice, predict_stream_class, AlignmentClass,
    PredictedClass,
};
use membench::memmodel::{simulate, KernelConfig, MemConfig};
use membench::patterns::{
    block_geometry, AccessStream, ArrayConfig, GridSpec, PaddingSpec, PatternSpec, VectorSpec,
};
use proptest::prelude::*;

const F: f64 = 266.666;

fn spec_1d(lanes: u32, halo: u64, pad: u64, blocks: u64) -> PatternSpec {
    let block = block_geometry(1024, halo).unwrap();
    PatternSpec {
        grid: GridSpec::OneD {
            n: blocks * block.csize(),
            block,
        },
        padding: PaddingSpec::leading(pad),
        vector: VectorSpec::floats(lanes).unwrap(),
        arrays: ArrayConfig::new(1, 1).unwrap(),
    }
}

fn gbps(spec: PatternSpec) -> f64 {
    let s = AccessStream::new(spec).unwrap();
    simulate(
        &s,
        &KernelConfig::new(F).unwrap(),
        &MemConfig::manual(),
        None,
    )
    .unwrap()
    .gbps_effective
}

/// Enumerate every vector start address and every row start.
fn enumerated(spec: &PatternSpec, req: u64) -> (AlignmentClass, bool) {
    let s = AccessStream::new(*spec).unwrap();
    let vpr = s.vecs_per_row();
    let mut min_tz = u32::MAX;
    let mut some_row_aligned = false;
    for slot in s.slots() {
        let a = spec.byte_addr(slot.elem_index);
        if a != 0 {
            min_tz = min_tz.min(a.unsigned_abs().trailing_zeros());
        }
        if slot.cycle % vpr == 0 && a.rem_euclid(req as i64) == 0 {
            some_row_aligned = true;
        }
    }
    let class = if min_tz == u32::MAX {
        AlignmentClass::Unbounded
    } else {
        AlignmentClass::Bytes(1 << min_tz)
    };
    (class, some_row_aligned)
}

#[test]
fn nine_rule_cases() {
    let bus = MemConfig::default().bus_word_bytes();
    let cases = [
        (0, 16, 0, PredictedClass::Full),
        (16, 16, 0, PredictedClass::Full),
        (32, 16, 0, PredictedClass::Full),
        (8, 16, 8, PredictedClass::Full),
        (4, 8, 4, PredictedClass::Full),
        (2, 4, 2, PredictedClass::Full),
        (2, 16, 2, PredictedClass::Partial),
        (4, 16, 4, PredictedClass::Partial),
        (6, 16, 6, PredictedClass::Partial),
    ];
    for (halo, v, pad, class) in cases {
        let csize = block_geometry(1024, halo).unwrap().csize();
        let r = padding_advice(halo, VectorSpec::floats(v).unwrap(), csize, bus);
        assert_eq!((r.pad, r.class), (pad, class), "halo {halo} V{v}");
    }
}

#[test]
fn stride_misaligned_downgrades() {
    // csize 1000 is not a multiple of 16
    let r = padding_advice(8, VectorSpec::floats(16).unwrap(), 1000, 64);
    assert_eq!(r.class, PredictedClass::Partial);
    assert_eq!(r.rule, "block-stride-misaligned");
}

#[test]
fn halo_classes_match_lowest_bit() {
    assert_eq!(halo_class(6, 16, 4), halo_class(2, 16, 4));
    assert_eq!(halo_class(14, 16, 4), AlignmentClass::Bytes(8));
    assert_eq!(halo_class(12, 16, 4), halo_class(20, 16, 4));
    assert_eq!(halo_class(48, 16, 4), AlignmentClass::Bytes(64));
    assert_eq!(halo_class(0, 16, 4), AlignmentClass::Unbounded);
}

#[test]
fn predict_examples() {
    let cfg = MemConfig::default();
    let p = predict_stream_class(&spec_1d(16, 16, 0, 8), &cfg);
    assert_eq!(p.class, PredictedClass::Full);
    let p = predict_stream_class(&spec_1d(16, 4, 4, 8), &cfg);
    assert_eq!(p.class, PredictedClass::Partial);
    let p = predict_stream_class(&spec_1d(16, 4, 0, 8), &cfg);
    assert_eq!(p.class, PredictedClass::None);
}

#[test]
fn gcd_prediction_matches_enumeration_over_many_blocks() {
    // 10^4 block starts
    let cfg = MemConfig::default();
    for (halo, pad) in [(16, 0), (8, 8), (4, 4), (2, 0), (3, 5)] {
        let block = block_geometry(64, halo).unwrap();
        let spec = PatternSpec {
            grid: GridSpec::OneD {
                n: 10_000 * block.csize(),
                block,
            },
            padding: PaddingSpec::leading(pad),
            vector: VectorSpec::floats(16).unwrap(),
            arrays: ArrayConfig::new(1, 0).unwrap(),
        };
        let p = predict_stream_class(&spec, &cfg);
        let (align, some) = enumerated(&spec, p.requirement_bytes);
        assert_eq!(p.alignment, align, "halo {halo} pad {pad}");
        let class = if align.meets(p.requirement_bytes) {
            PredictedClass::Full
        } else if some {
            PredictedClass::Partial
        } else {
            PredictedClass::None
        };
        assert_eq!(p.class, class, "halo {halo} pad {pad}");
    }
}

fn arb_grid_spec() -> impl Strategy<Value = PatternSpec> {
    (
        0u32..6,
        1u64..4,
        0u64..12,
        0u64..20,
        0usize..3,
        (1u64..4, 1u64..4, 1u64..3),
        (0u64..6, 0u64..6),
    )
        .prop_filter_map(
            "valid geometry",
            |(lp, mult, halo, pad, kind, (ex, ey, ez), (rp, pp))| {
                let lanes = 1u32 << lp;
                let bsize = 32 * mult;
                let block = block_geometry(bsize, halo).ok()?;
                let grid = match kind {
                    0 => GridSpec::OneD {
                        n: ex * block.csize(),
                        block,
                    },
                    1 => GridSpec::OneHalfD {
                        dimx: ex * block.csize(),
                        dimy: ey + 1,
                        block_x: block,
                    },
                    _ => {
                        let by = block_geometry(8, halo.min(3)).unwrap();
                        GridSpec::TwoHalfD {
                            dimx: ex * block.csize(),
                            dimy: ey * by.csize(),
                            dimz: ez,
                            block_x: block,
                            block_y: by,
                        }
                    }
                };
                Some(PatternSpec {
                    grid,
                    padding: PaddingSpec {
                        pad,
                        row_pad: if kind > 0 { rp } else { 0 },
                        plane_pad: if kind > 1 { pp } else { 0 },
                    },
                    vector: VectorSpec::floats(lanes).ok()?,
                    arrays: ArrayConfig::new(1, 0).unwrap(),
                })
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prediction_matches_enumeration(spec in arb_grid_spec()) {
        let p = predict_stream_class(&spec, &MemConfig::default());
        let (align, some) = enumerated(&spec, p.requirement_bytes);
        prop_assert_eq!(p.alignment, align);
        let class = if align.meets(p.requirement_bytes) {
            PredictedClass::Full
        } else if some {
            PredictedClass::Partial
        } else {
            PredictedClass::None
        };
        prop_assert_eq!(p.class, class);
    }

    #[test]
    fn row_pad_recommendation_aligns_rows(lp in 2u32..6, row_pad in 0u64..16) {
        let lanes = 1u32 << lp;
        let block = block_geometry(64, 0).unwrap();
        let spec = PatternSpec {
            grid: GridSpec::OneHalfD { dimx: 128, dimy: 3, block_x: block },
            padding: PaddingSpec { pad: 0, row_pad, plane_pad: 0 },
            vector: VectorSpec::floats(lanes).unwrap(),
            arrays: ArrayConfig::new(1, 0).unwrap(),
        };
        let p = predict_stream_class(&spec, &MemConfig::default());
        let req = p.requirement_bytes;
        let row_bytes = spec.row_pitch() * 4;
        prop_assert_eq!(p.row_pad.is_some(), !row_bytes.is_multiple_of(req));
        if let Some(fix) = p.row_pad {
            let fixed = PatternSpec { padding: PaddingSpec { row_pad: fix, ..spec.padding }, ..spec };
            prop_assert_eq!((fixed.row_pitch() * 4) % req, 0);
            let p2 = predict_stream_class(&fixed, &MemConfig::default());
            prop_assert_eq!(p2.class, PredictedClass::Full);
        }
    }

    #[test]
    fn efficiency_is_scale_invariant(m in 0.1f64..100.0, e in 0.1f64..100.0, p in 0.1f64..100.0, k in 0.01f64..100.0) {
        let a = efficiency(m, e, p);
        let b = efficiency(m * k, e * k, p * k);
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn merge_structs_are_pow2_multiples(r in 0u32..9, w in 0u32..9, eb_pow in 0u32..4) {
        prop_assume!(r + w > 0);
        let eb = 1u32 << eb_pow;
        let rep = merge_advice(ArrayConfig::new(r, w).unwrap(), eb);
        if let Some(m) = rep.merge {
            for s in [m.read_struct_bytes, m.write_struct_bytes] {
                prop_assert!(s == 0 || (s % u64::from(eb) == 0 && (s / u64::from(eb)).is_power_of_two()));
            }
            prop_assert!(m.merged.reads <= 1 && m.merged.writes <= 1);
        } else {
            prop_assert!(!(r == 0 || r.is_power_of_two()) || !(w == 0 || w.is_power_of_two()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prediction_consistent_with_simulation(vi in 0usize..4, halo in 0u64..40, pad in 0u64..40) {
        let lanes = [4u32, 8, 16, 32][vi];
        let spec = spec_1d(lanes, halo, pad, 24);
        let base = gbps(spec_1d(lanes, 0, 0, 24));
        let got = gbps(spec);
        let class = predict_stream_class(&spec, &MemConfig::default()).class;
        if class == PredictedClass::Full {
            prop_assert!((got / base - 1.0).abs() <= 0.02, "full: {} vs {}", got, base);
        } else {
            prop_assert!(got < base, "{:?}: {} vs {}", class, got, base);
        }
    }

    #[test]
    fn same_halo_class_same_bandwidth(vi in 0usize..2, h1 in 1u64..48, h2 in 1u64..48) {
        let lanes = [8u32, 16][vi];
        prop_assume!(halo_class(h1, lanes, 4) == halo_class(h2, lanes, 4));
        let a = gbps(spec_1d(lanes, h1, 0, 24));
        let b = gbps(spec_1d(lanes, h2, 0, 24));
        prop_assert!((a / b - 1.0).abs() <= 0.01, "{} vs {}", a, b);
    }

    #[test]
    fn full_advice_reaches_baseline(vi in 0usize..4, halo in 0u64..64) {
        let lanes = [4u32, 8, 16, 32][vi];
        let csize = block_geometry(1024, halo).unwrap().csize();
        let adv = padding_advice(halo, VectorSpec::floats(lanes).unwrap(), csize, 64);
        prop_assume!(adv.class == PredictedClass::Full);
        let base = gbps(spec_1d(lanes, 0, 0, 24));
        let got = gbps(spec_1d(lanes, halo, adv.pad, 24));
        prop_assert!((got / base - 1.0).abs() <= 0.02, "{} vs {}", got, base);
    }
}
