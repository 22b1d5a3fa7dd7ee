mod common;

use ihvc_core::codec::{
    decode_sequence, encode_sequence, encode_sequence_with_recon, measure_rate, CodedSequence,
};
use ihvc_core::semantics::{split_full_params, SEM_DIM};
use ihvc_core::{CodecError, FullBodyParams, QuantConfig, SemanticVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f32 {
    (rng.gen_range(lo.ln()..hi.ln())).exp() as f32
}

fn random_key(rng: &mut impl Rng) -> FullBodyParams<f64> {
    let mut k = FullBodyParams::zeros();
    for j in k.body.iter_mut() {
        *j = [0; 3].map(|_| rng.gen_range(-1.0..1.0));
    }
    k.shape = [0; 10].map(|_| rng.gen_range(-0.3..0.3));
    k.rot = [0; 3].map(|_| rng.gen_range(-1.0..1.0));
    k.trans = [0; 3].map(|_| rng.gen_range(-0.5..0.5));
    k.loc = [
        rng.gen_range(0.2..0.8),
        rng.gen_range(0.2..0.8),
        rng.gen_range(0.3..0.9),
        rng.gen_range(0.3..0.9),
    ];
    k
}

/// Random walk from the key semantics; location stays inside [0.05, 0.95].
fn random_frames(rng: &mut impl Rng, start: &SemanticVector<f64>, len: usize) -> Vec<SemanticVector<f64>> {
    let scale = log_uniform(rng, 1e-4, 0.3) as f64;
    let mut cur = start.flatten();
    (0..len)
        .map(|_| {
            for (c, v) in cur.iter_mut().enumerate() {
                *v += rng.gen_range(-scale..=scale);
                if c >= 27 {
                    *v = v.clamp(0.05, 0.95);
                }
            }
            SemanticVector::from_flat(&cur).unwrap()
        })
        .collect()
}

#[test]
fn thousand_random_sequences_round_trip_within_half_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seq in 0..1000 {
        let key = random_key(&mut rng);
        let (start, _) = split_full_params(&key).unwrap();
        let len = rng.gen_range(0..=200);
        let frames = random_frames(&mut rng, &start, len);
        let cfg = QuantConfig::new(
            log_uniform(&mut rng, 1e-5, 0.1),
            log_uniform(&mut rng, 1e-5, 0.1),
            log_uniform(&mut rng, 1e-5, 0.1),
            log_uniform(&mut rng, 1e-5, 0.05),
        );
        let (cs, recon) =
            encode_sequence_with_recon(&key, b"key", &frames, cfg, 64, 48, 30.0).unwrap();
        let parsed = CodedSequence::from_bytes(&cs.to_bytes()).unwrap();
        let decoded = decode_sequence::<f64>(&parsed).unwrap();
        assert_eq!(decoded.frames.len(), len);
        assert_eq!(decoded.frames, recon, "sequence {seq}");
        for (d, o) in decoded.frames.iter().zip(&frames) {
            let (d, o) = (d.flatten(), o.flatten());
            for c in 0..SEM_DIM {
                let half = cfg.step_for_component(c) as f64 / 2.0;
                assert!((d[c] - o[c]).abs() <= half, "sequence {seq} component {c}");
            }
        }
    }
}

#[test]
fn encoding_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let key = random_key(&mut rng);
    let (start, _) = split_full_params(&key).unwrap();
    let frames = random_frames(&mut rng, &start, 120);
    let a = encode_sequence(&key, b"png", &frames, QuantConfig::default(), 384, 384, 30.0).unwrap();
    let b = encode_sequence(&key, b"png", &frames, QuantConfig::default(), 384, 384, 30.0).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
}

#[test]
fn truncation_and_trailing_bytes_are_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let key = random_key(&mut rng);
    let (start, _) = split_full_params(&key).unwrap();
    let frames = random_frames(&mut rng, &start, 40);
    let cs = encode_sequence(&key, b"png", &frames, QuantConfig::default(), 384, 384, 30.0).unwrap();
    let mut short = cs.clone();
    short.inter_segment.pop();
    let err = decode_sequence::<f64>(&short).unwrap_err();
    assert!(matches!(err, CodecError::TruncatedSegment), "{err:?}");
    assert_eq!(err.to_string(), "truncated segment");

    let bytes = cs.to_bytes();
    for cut in [1, 7, bytes.len() / 2] {
        assert!(CodedSequence::from_bytes(&bytes[..bytes.len() - cut]).is_err());
    }
    let mut long = bytes.clone();
    long.push(0);
    assert!(CodedSequence::from_bytes(&long).is_err());
}

#[test]
fn constant_sequence_is_cheap_after_adaptation() {
    let mut key = FullBodyParams::<f64>::zeros();
    key.loc = [0.5, 0.5, 0.8, 0.8];
    key.body[16] = [0.3, 0.1, -0.2];
    let (sem, _) = split_full_params(&key).unwrap();
    let frames = vec![sem; 150];
    let cs = encode_sequence(&key, b"", &frames, QuantConfig::default(), 384, 384, 30.0).unwrap();
    assert_eq!(cs.header.frame_count, 150);
    assert_eq!((cs.header.width, cs.header.height), (384, 384));
    let tail = &cs.per_frame_bits[10..];
    let mean = tail.iter().map(|&b| b as f64).sum::<f64>() / tail.len() as f64;
    assert!(mean < 31.0, "mean {mean}");
    // Oracle: ideal cost of the same all-zero bin stream.
    let mut model = common::ModelCost::new();
    let costs: Vec<f64> = (0..150).map(|_| model.frame(&[0; SEM_DIM])).collect();
    let ideal_tail = costs[10..].iter().sum::<f64>() / 140.0;
    assert!(ideal_tail < 31.0);
    let total: u64 = cs.per_frame_bits.iter().map(|&b| b as u64).sum();
    assert!((total as f64) <= costs.iter().sum::<f64>() + 64.0);
}

#[test]
fn rate_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let key = random_key(&mut rng);
    let (start, _) = split_full_params(&key).unwrap();
    let frames = random_frames(&mut rng, &start, 149);
    let payload = vec![7u8; 1000];
    let cs = encode_sequence(&key, &payload, &frames, QuantConfig::default(), 384, 384, 30.0).unwrap();
    let bits = 8.0 * cs.inter_segment.len() as f64;
    let ex = measure_rate(&cs, false).unwrap();
    assert!((ex - bits * 30.0 / 150.0 / 1000.0).abs() < 1e-12);
    let inc = measure_rate(&cs, true).unwrap();
    let key_bits = (1000.0 + 332.0) * 8.0;
    assert!((inc - (bits + key_bits) * 30.0 / 150.0 / 1000.0).abs() < 1e-12);
    let fast = encode_sequence(&key, &payload, &frames, QuantConfig::default(), 384, 384, 60.0).unwrap();
    assert!((measure_rate(&fast, false).unwrap() - 2.0 * ex).abs() < 1e-12);
}
