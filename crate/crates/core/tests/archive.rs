mod common;

use std::path::PathBuf;

use tmuq_core::harness::archive::{units_bytes, Encoder, Model, ModelArchive, VERSION};
use tmuq_core::uncertainty::probability_grid;
use tmuq_core::{BinaryTM, ConvolutionalTM, Error, ImageThermometer, MulticlassTM, PatchConfig, TMParams, ThermometerEncoder};

fn moons_like() -> (BinaryTM, ThermometerEncoder, Vec<[f64; 2]>) {
    let (xs, ys) = tmuq_core::datagen::two_moons(200, 0.1, 5).unwrap();
    let rows: Vec<Vec<f64>> = xs.iter().map(|p| p.to_vec()).collect();
    let enc = ThermometerEncoder::fit(&rows, 16, true).unwrap();
    let mut tm = BinaryTM::new(enc.width(), TMParams::new(50, 1.5, 40).with_seed(8).with_boost(true)).unwrap();
    tm.fit(&enc.encode_all(&rows).unwrap(), &ys, 3, None).unwrap();
    let mesh = tmuq_core::datagen::mesh_grid((-2.0, 3.0), (-1.5, 2.0), 15).unwrap();
    (tm, enc, mesh)
}

#[test]
fn moons_model_round_trip_keeps_the_grid() {
    let (tm, enc, mesh) = moons_like();
    let grid = probability_grid(&tm, &enc, &mesh).unwrap();
    let archive = ModelArchive::new(Model::Binary(tm), Encoder::Thermometer(enc)).with_meta("epochs", 3);
    let bytes = archive.to_bytes();
    let back = ModelArchive::from_bytes(&bytes).unwrap();
    let (Model::Binary(tm2), Encoder::Thermometer(enc2)) = (&back.model, &back.encoder) else { panic!("wrong kinds") };
    assert_eq!(probability_grid(tm2, enc2, &mesh).unwrap(), grid);
    assert_eq!(back.to_bytes(), bytes);
}

#[test]
fn training_resumes_identically_after_reload() {
    let xs: Vec<Vec<u8>> = (0..24u32).map(|i| (0..5).map(|b| ((i >> b) & 1) as u8).collect()).collect();
    let ys: Vec<usize> = xs.iter().map(|x| (x[0] ^ x[2]) as usize).collect();
    let classes = vec!["no".to_string(), "yes".to_string()];
    let mut a = MulticlassTM::new(classes, 5, TMParams::new(10, 3.0, 10).with_seed(6)).unwrap();
    a.fit(&xs, &ys, 2).unwrap();
    let Model::Multiclass(mut b) = ModelArchive::from_bytes(&ModelArchive::new(Model::Multiclass(a.clone()), Encoder::None).to_bytes())
        .unwrap()
        .model
    else {
        panic!("wrong kind")
    };
    a.fit(&xs, &ys, 2).unwrap();
    b.fit(&xs, &ys, 2).unwrap();
    assert_eq!(units_bytes(a.units()), units_bytes(b.units()));
}

#[test]
fn conv_model_round_trip() {
    let set = common::synthetic_images(6, 0.0, 1);
    let enc = ImageThermometer::new(3, 2);
    let images: Vec<_> = set.images.iter().map(|p| enc.encode_image(p, 32, 32).unwrap()).collect();
    let config = PatchConfig::new((32, 32, 6), (5, 5));
    let mut tm = ConvolutionalTM::new(config, set.class_names.clone(), TMParams::new(20, 4.0, 10).with_seed(2)).unwrap();
    tm.fit(&images, &set.labels, 1).unwrap();
    let sums: Vec<Vec<i64>> = images.iter().map(|i| tm.class_sums_all(i).unwrap()).collect();
    let bytes = ModelArchive::new(Model::Convolutional(tm), Encoder::Image(enc)).to_bytes();
    let back = ModelArchive::from_bytes(&bytes).unwrap();
    let Model::Convolutional(tm2) = &back.model else { panic!("wrong kind") };
    assert_eq!(back.encoder, Encoder::Image(enc));
    assert_eq!(tm2.config(), &config);
    let sums2: Vec<Vec<i64>> = images.iter().map(|i| tm2.class_sums_all(i).unwrap()).collect();
    assert_eq!(sums, sums2);
}

#[test]
fn damaged_archives_are_rejected() {
    let (tm, enc, _) = moons_like();
    let bytes = ModelArchive::new(Model::Binary(tm), Encoder::Thermometer(enc)).to_bytes();
    for cut in (0..bytes.len()).step_by(97) {
        assert!(matches!(ModelArchive::from_bytes(&bytes[..cut]), Err(Error::CorruptArchive(_))), "cut {cut}");
    }
    let mut newer = bytes.clone();
    newer[4..8].copy_from_slice(&(VERSION + 1).to_le_bytes());
    assert!(matches!(ModelArchive::from_bytes(&newer), Err(Error::VersionMismatch { .. })));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.tmuq");
    std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
    assert!(matches!(ModelArchive::load(&path), Err(Error::CorruptArchive(_))));
}

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/binary_v1.tmuq")
}

/// Deterministic model behind the stored fixture.
fn fixture_model() -> ModelArchive {
    let xs: Vec<Vec<f64>> = (0..16).map(|i| vec![f64::from(i) * 0.25, f64::from(15 - i) * 1.5]).collect();
    let ys: Vec<u8> = (0..16).map(|i| (i % 3 == 0) as u8).collect();
    let enc = ThermometerEncoder::fit(&xs, 4, true).unwrap();
    let mut tm = BinaryTM::new(enc.width(), TMParams::new(12, 2.5, 6).with_seed(42).with_boost(true)).unwrap();
    tm.fit(&enc.encode_all(&xs).unwrap(), &ys, 4, None).unwrap();
    ModelArchive::new(Model::Binary(tm), Encoder::Thermometer(enc)).with_meta("fixture", "v1")
}

#[test]
fn stored_fixture_decodes_to_the_same_model() {
    let fresh = fixture_model().to_bytes();
    if std::env::var_os("TMUQ_WRITE_FIXTURES").is_some() {
        std::fs::create_dir_all(fixture_path().parent().unwrap()).unwrap();
        std::fs::write(fixture_path(), &fresh).unwrap();
    }
    let stored = std::fs::read(fixture_path()).expect("fixture present");
    // Header fields are little-endian on every host.
    assert_eq!(&stored[..8], b"TMUQ\x01\x00\x00\x00");
    assert_eq!(stored, fresh);

    let loaded = ModelArchive::from_bytes(&stored).unwrap();
    let (Model::Binary(a), Encoder::Thermometer(ea)) = (&loaded.model, &loaded.encoder) else { panic!("wrong kinds") };
    let reference = fixture_model();
    let (Model::Binary(b), Encoder::Thermometer(eb)) = (&reference.model, &reference.encoder) else { panic!("wrong kinds") };
    let mesh = tmuq_core::datagen::mesh_grid((-1.0, 5.0), (-1.0, 25.0), 9).unwrap();
    assert_eq!(probability_grid(a, ea, &mesh).unwrap(), probability_grid(b, eb, &mesh).unwrap());
}
