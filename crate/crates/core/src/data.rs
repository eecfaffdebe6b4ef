//! Image ingestion and synthetic data.
//!
//! IDX is MNIST's container: a big-endian `u32` magic, one big-endian `u32` per
//! dimension, then the unsigned-byte payload in row-major order.

use std::path::Path;

use rand::seq::index;
use rand::Rng;

use crate::clustering::BipolarVector;
use crate::rng::{self, Stream};
use crate::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

/// `len` grayscale images of `width x height` pixels, stored back to back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSet {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    labels: Option<Vec<u8>>,
}

impl ImageSet {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        let dim = width.checked_mul(height).ok_or(Error::DimensionOverflow)?;
        if dim == 0 {
            return Err(Error::Malformed { format: "image set", reason: "zero-sized images".into() });
        }
        if pixels.len() % dim != 0 {
            return Err(Error::Malformed {
                format: "image set",
                reason: format!("{} pixels is not a multiple of {width}x{height}", pixels.len()),
            });
        }
        Ok(Self { width, height, pixels, labels: None })
    }

    /// Attach one label per image.
    pub fn with_labels(mut self, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixels per image.
    pub fn dim(&self) -> usize {
        self.width * self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let d = self.dim();
        &self.pixels[i * d..(i + 1) * d]
    }

    pub fn images(&self) -> impl Iterator<Item = &[u8]> {
        self.pixels.chunks_exact(self.dim())
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    /// Threshold every image onto the hypercube.
    pub fn to_bipolar(&self) -> Vec<BipolarVector> {
        self.images().map(BipolarVector::from_pixels).collect()
    }

    fn select(&self, picks: impl Iterator<Item = usize> + Clone) -> Self {
        let pixels = picks.clone().flat_map(|i| self.image(i).iter().copied()).collect();
        let labels = self.labels.as_ref().map(|l| picks.map(|i| l[i]).collect());
        Self { width: self.width, height: self.height, pixels, labels }
    }
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::TruncatedPayload { expected: at + 4, found: bytes.len() })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let found = read_u32(bytes, 0)?;
    if found != expected {
        return Err(Error::BadMagic { expected, found });
    }
    Ok(())
}

fn check_payload(bytes: &[u8], header: usize, payload: usize) -> Result<()> {
    let expected = header.checked_add(payload).ok_or(Error::DimensionOverflow)?;
    if bytes.len() < expected {
        return Err(Error::TruncatedPayload { expected, found: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(Error::TrailingBytes { extra: bytes.len() - expected });
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<ImageSet> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let payload = count
        .checked_mul(rows)
        .and_then(|n| n.checked_mul(cols))
        .ok_or(Error::DimensionOverflow)?;
    check_payload(bytes, 16, payload)?;
    ImageSet::new(cols, rows, bytes[16..].to_vec())
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABEL_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    check_payload(bytes, 8, count)?;
    Ok(bytes[8..].to_vec())
}

pub fn serialize_idx_images(set: &ImageSet) -> Result<Vec<u8>> {
    let field = |v: usize| u32::try_from(v).map_err(|_| Error::DimensionOverflow);
    let mut out = Vec::with_capacity(16 + set.pixels.len());
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&field(set.len())?.to_be_bytes());
    out.extend_from_slice(&field(set.height)?.to_be_bytes());
    out.extend_from_slice(&field(set.width)?.to_be_bytes());
    out.extend_from_slice(&set.pixels);
    Ok(out)
}

pub fn serialize_idx_labels(labels: &[u8]) -> Result<Vec<u8>> {
    let count = u32::try_from(labels.len()).map_err(|_| Error::DimensionOverflow)?;
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&count.to_be_bytes());
    out.extend_from_slice(labels);
    Ok(out)
}

pub fn read_idx_images(path: impl AsRef<Path>) -> Result<ImageSet> {
    parse_idx_images(&std::fs::read(path)?)
}

pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    parse_idx_labels(&std::fs::read(path)?)
}

/// Keep the central `width x height` window of every image.
pub fn center_crop(set: &ImageSet, width: usize, height: usize) -> Result<ImageSet> {
    if width > set.width || height > set.height || width == 0 || height == 0 {
        return Err(Error::TargetTooLarge {
            target_w: width,
            target_h: height,
            source_w: set.width,
            source_h: set.height,
        });
    }
    let x0 = (set.width - width) / 2;
    let y0 = (set.height - height) / 2;
    let mut pixels = Vec::with_capacity(set.len() * width * height);
    for img in set.images() {
        for row in img.chunks_exact(set.width).skip(y0).take(height) {
            pixels.extend_from_slice(&row[x0..x0 + width]);
        }
    }
    Ok(ImageSet { width, height, pixels, labels: set.labels.clone() })
}

/// The first `m` images in file order.
pub fn take_first(set: &ImageSet, m: usize) -> Result<ImageSet> {
    if m > set.len() {
        return Err(Error::NotEnoughImages { requested: m, available: set.len() });
    }
    Ok(set.select(0..m))
}

/// `m` images drawn without replacement, kept in file order.
pub fn sample(set: &ImageSet, m: usize, seed: u64) -> Result<ImageSet> {
    if m > set.len() {
        return Err(Error::NotEnoughImages { requested: m, available: set.len() });
    }
    let mut rng = rng::stream(seed, Stream::Sampling);
    let mut picks = index::sample(&mut rng, set.len(), m).into_vec();
    picks.sort_unstable();
    Ok(set.select(picks.into_iter()))
}

/// Noisy copies of random hypercube vertices, with the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSet {
    pub inputs: Vec<BipolarVector>,
    /// Prototype index of each input.
    pub labels: Vec<usize>,
    pub prototypes: Vec<BipolarVector>,
}

impl SyntheticSet {
    /// As a one-row image per input: -1 becomes pixel 0, +1 becomes 255.
    pub fn to_image_set(&self) -> Result<ImageSet> {
        let dim = self.inputs.first().map_or(0, BipolarVector::len);
        let pixels = self
            .inputs
            .iter()
            .flat_map(|u| u.values().iter().map(|&v| if v > 0.0 { 255u8 } else { 0 }))
            .collect();
        let labels = self.labels.iter().map(|&l| u8::try_from(l).unwrap_or(u8::MAX)).collect();
        ImageSet::new(dim, 1, pixels)?.with_labels(labels)
    }
}

/// `k` prototypes with `per_cluster` points each; every component of a point is
/// flipped independently with probability `flip_prob`. Points are emitted cluster
/// by cluster.
pub fn synth_clusters(k: usize, per_cluster: usize, dim: usize, flip_prob: f64, seed: u64) -> Result<SyntheticSet> {
    if !(0.0..0.5).contains(&flip_prob) {
        return Err(Error::InvalidParams(format!("flip_prob must lie in [0, 0.5), got {flip_prob}")));
    }
    if k == 0 || dim == 0 {
        return Err(Error::InvalidParams("need k >= 1 and dim >= 1".into()));
    }
    let mut rng = rng::stream(seed, Stream::Synthetic);
    let sign = |b: bool| if b { 1.0 } else { -1.0 };
    let prototypes: Vec<Vec<f64>> =
        (0..k).map(|_| (0..dim).map(|_| sign(rng.random_bool(0.5))).collect()).collect();
    let mut inputs = Vec::with_capacity(k * per_cluster);
    let mut labels = Vec::with_capacity(k * per_cluster);
    for (c, proto) in prototypes.iter().enumerate() {
        for _ in 0..per_cluster {
            let point = proto
                .iter()
                .map(|&v| if rng.random_bool(flip_prob) { -v } else { v })
                .collect();
            inputs.push(BipolarVector::new(point)?);
            labels.push(c);
        }
    }
    let prototypes = prototypes.into_iter().map(BipolarVector::new).collect::<Result<_>>()?;
    Ok(SyntheticSet { inputs, labels, prototypes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn header(magic: u32, dims: &[u32]) -> Vec<u8> {
        let mut v = magic.to_be_bytes().to_vec();
        for d in dims {
            v.extend_from_slice(&d.to_be_bytes());
        }
        v
    }

    #[test]
    fn minimal_file() {
        let mut bytes = header(IMAGE_MAGIC, &[1, 2, 2]);
        bytes.extend_from_slice(&[1, 2, 3, 4]);
        let set = parse_idx_images(&bytes).unwrap();
        assert_eq!((set.len(), set.width(), set.height()), (1, 2, 2));
        assert_eq!(set.image(0), &[1, 2, 3, 4]);
        assert_eq!(serialize_idx_images(&set).unwrap(), bytes);
    }

    #[test]
    fn label_file_is_not_an_image_file() {
        let mut bytes = header(LABEL_MAGIC, &[4]);
        bytes.extend_from_slice(&[0, 1, 2, 3]);
        assert!(matches!(
            parse_idx_images(&bytes),
            Err(Error::BadMagic { expected: IMAGE_MAGIC, found: LABEL_MAGIC })
        ));
        assert_eq!(parse_idx_labels(&bytes).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(serialize_idx_labels(&[0, 1, 2, 3]).unwrap(), bytes);
    }

    #[test]
    fn truncated_and_trailing_payloads() {
        let mut bytes = header(IMAGE_MAGIC, &[2, 2, 2]);
        bytes.extend_from_slice(&[0; 7]);
        assert!(matches!(parse_idx_images(&bytes), Err(Error::TruncatedPayload { expected: 24, found: 23 })));
        assert!(matches!(parse_idx_images(&bytes[..10]), Err(Error::TruncatedPayload { .. })));
        bytes.extend_from_slice(&[0, 0]);
        assert!(matches!(parse_idx_images(&bytes), Err(Error::TrailingBytes { extra: 1 })));
    }

    #[test]
    fn huge_dimensions_overflow() {
        let bytes = header(IMAGE_MAGIC, &[u32::MAX, u32::MAX, u32::MAX]);
        let err = parse_idx_images(&bytes).unwrap_err();
        assert!(matches!(err, Error::DimensionOverflow | Error::TruncatedPayload { .. }), "{err}");
        if usize::BITS == 64 {
            assert!(matches!(err, Error::DimensionOverflow));
        }
    }

    fn ramp(count: usize, w: usize, h: usize) -> ImageSet {
        let pixels = (0..count * w * h).map(|i| (i % 251) as u8).collect();
        ImageSet::new(w, h, pixels).unwrap()
    }

    #[test]
    fn crop_28_to_20() {
        let set = ramp(3, 28, 28);
        let out = center_crop(&set, 20, 20).unwrap();
        assert_eq!((out.width(), out.height(), out.len()), (20, 20, 3));
        for (img, src) in out.images().zip(set.images()) {
            for y in 0..20 {
                for x in 0..20 {
                    assert_eq!(img[y * 20 + x], src[(y + 4) * 28 + (x + 4)]);
                }
            }
        }
    }

    #[test]
    fn crop_identity_and_too_large() {
        let set = ramp(2, 5, 4);
        assert_eq!(center_crop(&set, 5, 4).unwrap(), set);
        assert!(matches!(center_crop(&set, 6, 4), Err(Error::TargetTooLarge { .. })));
    }

    #[test]
    fn crop_pattern_keeps_center_drops_corners() {
        // 5x5 with a marked center and marked corners, cropped to 3x3
        let mut img = vec![0u8; 25];
        for c in [0, 4, 20, 24] {
            img[c] = 200;
        }
        img[12] = 99;
        let out = center_crop(&ImageSet::new(5, 5, img).unwrap(), 3, 3).unwrap();
        assert_eq!(out.image(0)[4], 99);
        assert!(!out.image(0).contains(&200));
    }

    #[test]
    fn take_first_cases() {
        let set = ramp(5, 2, 2).with_labels(vec![9, 8, 7, 6, 5]).unwrap();
        assert!(take_first(&set, 0).unwrap().is_empty());
        assert_eq!(take_first(&set, 5).unwrap(), set);
        let two = take_first(&set, 2).unwrap();
        assert_eq!(two.image(1), set.image(1));
        assert_eq!(two.labels(), Some(&[9u8, 8][..]));
        assert!(matches!(take_first(&set, 6), Err(Error::NotEnoughImages { requested: 6, available: 5 })));
    }

    #[test]
    fn random_sample_is_seeded_and_ordered() {
        let set = ramp(50, 2, 1).with_labels((0..50).collect()).unwrap();
        let a = sample(&set, 10, 3).unwrap();
        assert_eq!(a, sample(&set, 10, 3).unwrap());
        let labels = a.labels().unwrap();
        assert!(labels.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn synthetic_without_noise_is_exact() {
        let s = synth_clusters(3, 5, 16, 0.0, 1).unwrap();
        assert_eq!(s.inputs.len(), 15);
        for (u, &l) in s.inputs.iter().zip(&s.labels) {
            assert_eq!(u, &s.prototypes[l]);
        }
        assert!(synth_clusters(2, 2, 4, 0.5, 0).is_err());
        assert!(synth_clusters(2, 2, 4, -0.1, 0).is_err());
    }

    #[test]
    fn synthetic_flip_rate() {
        let s = synth_clusters(1, 400, 64, 0.1, 8).unwrap();
        let proto = &s.prototypes[0];
        let flips: usize = s
            .inputs
            .iter()
            .map(|u| u.values().iter().zip(proto.values()).filter(|(a, b)| a != b).count())
            .sum();
        let rate = flips as f64 / (400.0 * 64.0);
        assert!((rate - 0.1).abs() < 0.01, "{rate}");
    }

    #[test]
    fn synthetic_image_round_trip() {
        let s = synth_clusters(2, 3, 10, 0.2, 4).unwrap();
        let set = s.to_image_set().unwrap();
        assert_eq!(set.to_bipolar(), s.inputs);
    }

    proptest! {
        #[test]
        fn idx_round_trip(count in 0usize..6, w in 1usize..9, h in 1usize..9, seed in any::<u64>()) {
            let mut rng = rng::substream(seed, 99);
            let pixels = (0..count * w * h).map(|_| rng.random::<u8>()).collect();
            let set = ImageSet::new(w, h, pixels).unwrap();
            let bytes = serialize_idx_images(&set).unwrap();
            let back = parse_idx_images(&bytes).unwrap();
            prop_assert_eq!(&back, &set);
            prop_assert_eq!(serialize_idx_images(&back).unwrap(), bytes);
        }

        #[test]
        fn crop_keeps_a_sub_multiset(w in 1usize..12, h in 1usize..12, tw in 1usize..12, th in 1usize..12, seed in any::<u64>()) {
            prop_assume!(tw <= w && th <= h);
            let mut rng = rng::substream(seed, 99);
            let set = ImageSet::new(w, h, (0..w * h).map(|_| rng.random::<u8>()).collect()).unwrap();
            let out = center_crop(&set, tw, th).unwrap();
            let mut pool = set.image(0).to_vec();
            for p in out.image(0) {
                let pos = pool.iter().position(|q| q == p);
                prop_assert!(pos.is_some());
                pool.swap_remove(pos.unwrap());
            }
        }
    }
}
