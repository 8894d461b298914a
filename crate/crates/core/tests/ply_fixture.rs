use splatcache_core::scene::ply::{load_ply, to_ply_bytes};
use splatcache_core::scene::sh::SH_C0;
use splatcache_core::Error;

const FIXTURE: &[u8] = include_bytes!("fixtures/three.ply");

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[test]
fn loads_activated_values() {
    let cloud = load_ply(FIXTURE).unwrap();
    assert_eq!(cloud.len(), 3);
    let g = &cloud.gaussians[1];
    assert_eq!(g.position.as_slice(), &[1.5, -0.5, 2.0]);
    assert!((g.opacity - sigmoid(2.0)).abs() < 1e-12);
    assert!((g.scale.x - (-1.0f64).exp()).abs() < 1e-12);
    assert!((g.rotation.w - 0.5).abs() < 1e-12 && (g.rotation.i - 0.5).abs() < 1e-12);
    assert_eq!(g.sh.len(), 4);

    let g = &cloud.gaussians[0];
    assert_eq!(g.opacity, 0.5);
    assert_eq!(g.sh[0].as_slice(), &[0.5, -0.25, 1.0]);
    // f_rest is channel-major: red coefficients first.
    assert!((g.sh[1].x - 0.1).abs() < 1e-7 && (g.sh[2].x - 0.2).abs() < 1e-7 && (g.sh[3].x - 0.3).abs() < 1e-7);
    assert!((g.sh[1].y + 0.1).abs() < 1e-7 && (g.sh[1].z - 0.05).abs() < 1e-7);

    let g = &cloud.gaussians[2];
    let dc_red = SH_C0 * g.sh[0].x + 0.5;
    assert!((dc_red - 0.5).abs() < 1e-12);
}

#[test]
fn canonical_round_trip_is_byte_identical() {
    let cloud = load_ply(FIXTURE).unwrap();
    assert_eq!(to_ply_bytes(&cloud).unwrap(), FIXTURE);
}

#[test]
fn truncated_body_is_an_error() {
    assert!(load_ply(&FIXTURE[..FIXTURE.len() - 5]).is_err());
}

#[test]
fn missing_property_is_named() {
    let text = String::from_utf8_lossy(FIXTURE).into_owned();
    let header_end = text.find("end_header\n").unwrap() + "end_header\n".len();
    let header = text[..header_end].replace("property float opacity\n", "property float opacityx\n");
    let mut bytes = header.into_bytes();
    bytes.extend_from_slice(&FIXTURE[header_end..]);
    match load_ply(&bytes) {
        Err(Error::MissingProperty(name)) => assert_eq!(name, "opacity"),
        other => panic!("{other:?}"),
    }
}
