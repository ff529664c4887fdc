mod common;

use std::collections::BTreeSet;

use lwcwifi::ofdm::{
    add_cp, fft64, generate_header, ifft64, parse_header, receive_frame, remove_cp, repack_bits,
    transmit_frame, unpack_bits, CarrierPlan, Modulation, TaggedPayload, HEADER_LEN,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..64)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

#[test]
fn repack_unpack_all_bytes() {
    for b in 0..=255u8 {
        assert_eq!(unpack_bits(&repack_bits(b)).unwrap(), b);
    }
}

#[test]
fn fft_matches_direct_dft_and_inverts() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x = random_vec(&mut rng);
        let f = fft64(&x).unwrap();
        for (a, b) in f.iter().zip(common::naive_dft(&x, false)) {
            assert!((a - b).norm() < 1e-9);
        }
        let back = ifft64(&f).unwrap();
        worst = back.iter().zip(&x).map(|(a, b)| (a - b).norm()).fold(worst, f64::max);
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn plan_partitions_labels() {
    let plan = CarrierPlan::ieee80211a();
    let data: BTreeSet<i32> = plan.data_labels.iter().copied().collect();
    let pilots: BTreeSet<i32> = plan.pilot_labels.iter().copied().collect();
    let nulls: BTreeSet<i32> = plan.null_labels.iter().copied().collect();
    assert_eq!((data.len(), pilots.len(), nulls.len()), (48, 4, 12));
    assert!(data.is_disjoint(&pilots) && data.is_disjoint(&nulls) && pilots.is_disjoint(&nulls));
    let all: BTreeSet<i32> = data.union(&pilots).chain(nulls.iter()).copied().collect();
    assert_eq!(all, (-32..32).collect());
}

#[test]
fn header_crc_agrees_with_table_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let mut bytes = [0u8; 96];
        rng.fill(&mut bytes[..]);
        let p = TaggedPayload::new(bytes, rng.random_range(0..4096));
        let h = generate_header(&p);
        let crc: u8 = h[24..32].iter().fold(0, |a, &b| (a << 1) | b);
        assert_eq!(crc, common::crc8_table(&h[..24]));
        assert!(parse_header(&h).is_some());
        let mut bad = h;
        bad[rng.random_range(0..32)] ^= 1;
        assert!(parse_header(&bad).is_none());
        assert_eq!(h.len(), HEADER_LEN);
    }
}

#[test]
fn loopback_random_payloads_both_modulations() {
    let plan = CarrierPlan::ieee80211a();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in [Modulation::Bpsk, Modulation::Qpsk] {
        for i in 0..100 {
            let mut bytes = [0u8; 96];
            rng.fill(&mut bytes[..]);
            let tx = transmit_frame(&TaggedPayload::new(bytes, i), m, &plan, 0.02).unwrap();
            assert_eq!(tx.len(), m.frame_samples());
            assert_eq!(receive_frame(&tx, m, &plan).unwrap().payload, bytes);
        }
    }
}

proptest! {
    #[test]
    fn cp_roundtrip(re in prop::collection::vec(-1.0f64..1.0, 64), im in prop::collection::vec(-1.0f64..1.0, 64)) {
        let x: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let with = add_cp(&x).unwrap();
        prop_assert_eq!(&with[..16], &x[48..]);
        prop_assert_eq!(remove_cp(&with).unwrap().to_vec(), x);
    }
}
