mod common;

use common::{arb_spec, reference};
use membench::hostbench::{run_host, verify_checksum, HostError, HostRunSpec, Reference};
use membench::patterns::{
    block_geometry, AccessStream, ArrayConfig, GridSpec, PaddingSpec, PatternSpec, VectorSpec,
};
use proptest::prelude::*;

fn quick(spec: PatternSpec) -> HostRunSpec {
    HostRunSpec {
        repetitions: 2,
        warmup: 1,
        ..HostRunSpec::new(spec)
    }
}

#[test]
fn large_copy_matches_source() {
    let block = block_geometry(1024, 0).unwrap();
    let spec = PatternSpec {
        grid: GridSpec::OneD { n: 1 << 20, block },
        padding: PaddingSpec::default(),
        vector: VectorSpec::floats(16).unwrap(),
        arrays: ArrayConfig::new(1, 1).unwrap(),
    };
    let r = run_host(&HostRunSpec {
        threads: 2,
        ..quick(spec)
    })
    .unwrap();
    verify_checksum(&r, &Reference::new(&spec)).unwrap();
    assert_eq!(r.effective_bytes, (2 * 4) << 20);
    assert_eq!(r.wall_ns.len(), 2);
}

#[test]
fn misaligned_buffer_request_rejected() {
    let block = block_geometry(64, 0).unwrap();
    let spec = PatternSpec {
        grid: GridSpec::OneD { n: 64, block },
        padding: PaddingSpec::default(),
        vector: VectorSpec::floats(4).unwrap(),
        arrays: ArrayConfig::new(1, 1).unwrap(),
    };
    let bad = HostRunSpec {
        buffer_align: 12,
        ..quick(spec)
    };
    assert!(matches!(run_host(&bad), Err(HostError::BadAlignment(12))));
    let doubles = PatternSpec {
        vector: VectorSpec::new(4, 8).unwrap(),
        ..spec
    };
    assert!(matches!(
        run_host(&quick(doubles)),
        Err(HostError::UnsupportedElement(8))
    ));
    let none = HostRunSpec {
        repetitions: 0,
        ..quick(spec)
    };
    assert!(matches!(run_host(&none), Err(HostError::NoRepetitions)));
}

#[test]
fn wrong_reference_is_detected() {
    let block = block_geometry(64, 4).unwrap();
    let spec = PatternSpec {
        grid: GridSpec::OneD { n: 56 * 10, block },
        padding: PaddingSpec::leading(2),
        vector: VectorSpec::floats(8).unwrap(),
        arrays: ArrayConfig::new(2, 0).unwrap(),
    };
    let r = run_host(&quick(spec)).unwrap();
    verify_checksum(&r, &Reference::new(&spec)).unwrap();
    let other = PatternSpec {
        arrays: ArrayConfig::new(1, 0).unwrap(),
        ..spec
    };
    assert!(matches!(
        verify_checksum(&r, &Reference::new(&other)),
        Err(HostError::ReadChecksum { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn host_accounting_matches_stats_and_reference(spec in arb_spec()) {
        let r = run_host(&quick(spec)).unwrap();
        let stats = AccessStream::new(spec).unwrap().redundancy_stats();
        let scalar = reference(&spec).iter().filter(|t| t.2).count() as u64 * 4;
        prop_assert_eq!(r.effective_bytes, stats.effective_bytes);
        prop_assert_eq!(r.effective_bytes, scalar);
        prop_assert!(verify_checksum(&r, &Reference::new(&spec)).is_ok());
        prop_assert!(r.checksums.iter().all(|&c| c == r.checksum));
        if spec.arrays.writes > 0 {
            prop_assert_eq!(r.checksum, Reference::new(&spec).checksum());
        }
    }
}
