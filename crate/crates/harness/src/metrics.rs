use ihvc_core::Image;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

/// Mean squared error over all samples of all frames.
pub fn mse(a: &[Image], b: &[Image]) -> f64 {
    assert_eq!(a.len(), b.len(), "frame counts differ");
    let mut sum = 0u64;
    let mut n = 0u64;
    for (x, y) in a.iter().zip(b) {
        assert_eq!((x.width, x.height), (y.width, y.height), "frame sizes differ");
        for (&p, &q) in x.data.iter().zip(&y.data) {
            let d = p as i64 - q as i64;
            sum += (d * d) as u64;
        }
        n += x.data.len() as u64;
    }
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

/// PSNR in dB for 8-bit samples; infinite when `mse` is zero.
pub fn psnr(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}

/// Serializes infinity as the string `"inf"`, finite values as numbers.
pub fn serialize_db<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        v.serialize(s)
    }
}

pub fn format_db(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".to_string()
    } else {
        v.to_string()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Hash of an image's dimensions and raw RGB samples.
pub fn image_hash(img: &Image) -> String {
    let mut h = Sha256::new();
    h.update(img.width.to_le_bytes());
    h.update(img.height.to_le_bytes());
    h.update(&img.data);
    format!("{:x}", h.finalize())
}
