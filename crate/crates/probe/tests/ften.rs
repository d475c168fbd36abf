use std::path::Path;

use feature_probe::ften::{self, decode, read_feature_tensor, read_label_map, write_feature_tensor, write_label_map};
use feature_probe::ProbeError;
use feature_probe_core::rng::SplitMix64;
use feature_probe_core::{FeatureTensor, LabelMap};
use proptest::prelude::*;

/// Builds FTEN bytes field by field without going through the crate's encoder.
fn handmade(dtype: u32, stride: u32, c: u32, h: u32, w: u32, payload: &[u8]) -> Vec<u8> {
    let mut out = b"FTEN".to_vec();
    for v in [1u32, dtype, stride, c, h, w] {
        out.extend(v.to_le_bytes());
    }
    out.extend_from_slice(payload);
    out
}

fn f32_bytes(values: &[f32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn p() -> &'static Path {
    Path::new("t.ften")
}

#[test]
fn reads_two_by_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.ften");
    std::fs::write(&path, handmade(1, 8, 1, 2, 2, &f32_bytes(&[0.0, 1.0, 2.0, 3.0]))).unwrap();
    let t = read_feature_tensor(&path).unwrap();
    assert_eq!((t.channels(), t.height(), t.width(), t.stride()), (1, 2, 2, 8));
    assert_eq!(t.data(), &[0.0, 1.0, 2.0, 3.0]);
}

#[test]
fn seeded_tensor_round_trips_byte_for_byte() {
    let mut rng = SplitMix64::new(77);
    let values: Vec<f32> = (0..8 * 16 * 16).map(|_| rng.next_normal() as f32).collect();
    let expected = handmade(1, 16, 8, 16, 16, &f32_bytes(&values));
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.ften"), dir.path().join("b.ften"));
    std::fs::write(&a, &expected).unwrap();
    write_feature_tensor(&read_feature_tensor(&a).unwrap(), &b).unwrap();
    assert_eq!(std::fs::read(&b).unwrap(), expected);
}

#[test]
fn single_value_file_is_32_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.ften");
    write_feature_tensor(&FeatureTensor::new(1, 1, 1, 4, vec![0.0]).unwrap(), &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap().len(), ften::HEADER_LEN + 4);
    assert_eq!(ften::HEADER_LEN + 4, 32);
}

#[test]
fn stride_only_changes_stride_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let t = FeatureTensor::from_fn(2, 3, 3, 4, |c, y, x| (c * 9 + y * 3 + x) as f32).unwrap();
    let (a, b) = (dir.path().join("a.ften"), dir.path().join("b.ften"));
    write_feature_tensor(&t, &a).unwrap();
    write_feature_tensor(&t.clone().with_stride(32), &b).unwrap();
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    let diff: Vec<usize> = (0..a.len()).filter(|i| a[*i] != b[*i]).collect();
    assert_eq!(a.len(), b.len());
    assert!(!diff.is_empty() && diff.iter().all(|i| (12..16).contains(i)), "{diff:?}");
}

#[test]
fn truncated_payload_names_offset() {
    let bytes = handmade(1, 4, 1, 2, 2, &f32_bytes(&[0.0, 1.0, 2.0]));
    match decode(&bytes, p()) {
        Err(ProbeError::TruncatedPayload { offset, expected, .. }) => assert_eq!((offset, expected), (40, 44)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn header_errors_name_offsets() {
    let mut bad_magic = handmade(1, 4, 1, 1, 1, &f32_bytes(&[0.0]));
    bad_magic[0] = b'X';
    assert!(matches!(decode(&bad_magic, p()), Err(ProbeError::BadMagic { offset: 0, .. })));

    let mut bad_version = handmade(1, 4, 1, 1, 1, &f32_bytes(&[0.0]));
    bad_version[4] = 2;
    assert!(matches!(decode(&bad_version, p()), Err(ProbeError::UnsupportedVersion { version: 2, offset: 4, .. })));

    let bad_dtype = handmade(9, 4, 1, 1, 1, &[0; 4]);
    assert!(matches!(decode(&bad_dtype, p()), Err(ProbeError::UnsupportedDtype { code: 9, offset: 8, .. })));

    let zero = handmade(1, 4, 1, 0, 1, &[]);
    assert!(matches!(decode(&zero, p()), Err(ProbeError::BadHeader { offset: 20, .. })));

    assert!(matches!(decode(b"FTEN\x01\x00", p()), Err(ProbeError::TruncatedPayload { offset: 6, .. })));
}

#[test]
fn non_finite_value_names_its_offset() {
    let bytes = handmade(1, 4, 1, 1, 3, &f32_bytes(&[0.0, f32::NAN, f32::INFINITY]));
    assert!(matches!(decode(&bytes, p()), Err(ProbeError::NonFiniteValue { offset: 32, .. })));
}

#[test]
fn trailing_bytes_are_rejected() {
    let bytes = handmade(1, 4, 1, 1, 1, &f32_bytes(&[0.0, 1.0]));
    assert!(matches!(decode(&bytes, p()), Err(ProbeError::BadHeader { offset: 32, .. })));
}

#[test]
fn label_maps_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labels.ften");
    let two = LabelMap::new(2, 3, vec![1, 1, 2, 1, 2, 2]).unwrap();
    write_label_map(&two, &path).unwrap();
    assert_eq!(read_label_map(&path).unwrap(), two);
}

#[test]
fn thousand_segment_histogram_survives() {
    let mut rng = SplitMix64::new(1000);
    let ids: Vec<u16> = (0..200 * 200).map(|_| 1 + rng.below(1000) as u16).collect();
    let mut expected = vec![0usize; 1001];
    ids.iter().for_each(|i| expected[*i as usize] += 1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labels.ften");
    write_label_map(&LabelMap::new(200, 200, ids).unwrap(), &path).unwrap();
    let mut seen = vec![0usize; 1001];
    read_label_map(&path).unwrap().ids().iter().for_each(|i| seen[*i as usize] += 1);
    assert_eq!(seen, expected);
}

#[test]
fn u8_labels_widen() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labels.ften");
    std::fs::write(&path, handmade(3, 1, 1, 1, 3, &[0, 7, 255])).unwrap();
    assert_eq!(read_label_map(&path).unwrap().ids(), &[0, 7, 255]);
}

#[test]
fn missing_file_is_file_not_found() {
    let err = read_feature_tensor(Path::new("/nonexistent/x.ften")).unwrap_err();
    assert_eq!(err.kind(), "FileNotFound");
    assert_eq!(err.exit_code(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn read_inverts_write(c in 1usize..4, h in 1usize..9, w in 1usize..9, stride in 1u32..64, seed: u64) {
        let mut rng = SplitMix64::new(seed);
        let t = FeatureTensor::from_fn(c, h, w, stride, |_, _, _| rng.next_normal() as f32).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ften");
        write_feature_tensor(&t, &path).unwrap();
        prop_assert_eq!(read_feature_tensor(&path).unwrap(), t);
    }

    #[test]
    fn decoder_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
        let mut framed = b"FTEN".to_vec();
        framed.extend(bytes);
        let _ = decode(&framed, p());
    }
}
