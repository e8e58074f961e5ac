mod common;

use common::reference_lzw;
use plkg::entropy::{lzw_compress_size, lzw_encode};
use proptest::prelude::*;

fn as_usize(v: &[u32]) -> Vec<usize> {
    v.iter().map(|x| *x as usize).collect()
}

#[test]
fn hand_traced_examples() {
    let zeros = [false; 16];
    let (codes, widths) = reference_lzw::encode(&zeros);
    assert_eq!(codes, vec![0, 2, 3, 4, 5, 0]);
    assert_eq!(widths, vec![1, 2, 2, 3, 3, 3]);
    assert_eq!(lzw_compress_size(&zeros).unwrap().output_bits, 14);

    // 0110: 0 | 1 | 1 | 0 with dictionary {0,1,01,11,10}.
    let bits = [false, true, true, false];
    let (codes, widths) = reference_lzw::encode(&bits);
    assert_eq!(codes, vec![0, 1, 1, 0]);
    assert_eq!(widths, vec![1, 2, 2, 3]);
}

proptest! {
    #[test]
    fn library_matches_reference(bits in proptest::collection::vec(any::<bool>(), 1..3000)) {
        let enc = lzw_encode(&bits);
        let (codes, widths) = reference_lzw::encode(&bits);
        prop_assert_eq!(as_usize(&enc.codes), codes.clone());
        prop_assert_eq!(as_usize(&enc.widths), widths.clone());
        let packed = reference_lzw::pack(&codes, &widths);
        prop_assert_eq!(packed.len(), lzw_compress_size(&bits).unwrap().output_bits);
        prop_assert_eq!(reference_lzw::decode(&packed, codes.len()), bits);
    }

    #[test]
    fn skewed_streams_match_too(p in 0.0f64..1.0, len in 1usize..2000, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<bool> = (0..len).map(|_| rng.random_bool(p)).collect();
        prop_assert_eq!(lzw_compress_size(&bits).unwrap().output_bits, reference_lzw::compressed_bits(&bits));
    }
}
