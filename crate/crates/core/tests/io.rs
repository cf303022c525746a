use feqo::io::*;
use proptest::prelude::*;

fn pixels(ppm: &[u8]) -> &[u8] {
    // Header is three newline-terminated lines.
    let mut seen = 0;
    let start = ppm
        .iter()
        .position(|&b| {
            seen += (b == b'\n') as usize;
            seen == 3
        })
        .unwrap();
    &ppm[start + 1..]
}

#[test]
fn header_layout_is_fixed() {
    let g = GridFile::new(2, 3, [0.0, 1.0, -2.0, 2.0], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    let b = g.to_bytes();
    assert_eq!(&b[..4], b"FEQO");
    assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
    assert_eq!(u64::from_le_bytes(b[8..16].try_into().unwrap()), 2);
    assert_eq!(u64::from_le_bytes(b[16..24].try_into().unwrap()), 3);
    assert_eq!(f64::from_le_bytes(b[40..48].try_into().unwrap()), -2.0);
    assert_eq!(b.len(), 56 + 6 * 8);
    assert_eq!(f64::from_le_bytes(b[56..64].try_into().unwrap()), 1.0);
}

#[test]
fn malformed_files_are_rejected() {
    let g = GridFile::new(2, 2, [0.0; 4], vec![0.0; 4]).unwrap();
    let good = g.to_bytes();
    assert!(GridFile::from_bytes(&good[..20]).is_err());
    let mut bad = good.clone();
    bad[0] = b'X';
    assert!(GridFile::from_bytes(&bad).is_err());
    let mut bad = good.clone();
    bad[4] = 9;
    assert!(GridFile::from_bytes(&bad).is_err());
    assert!(GridFile::from_bytes(&good[..good.len() - 8]).is_err());
    let mut bad = good.clone();
    bad[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
    assert!(GridFile::from_bytes(&bad).is_err());
    assert!(GridFile::new(0, 2, [0.0; 4], vec![]).is_err());
    assert!(GridFile::new(2, 2, [0.0; 4], vec![0.0; 3]).is_err());
}

#[test]
fn files_round_trip_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.bin");
    let g = GridFile::new(3, 1, [1.0, 2.0, 3.0, 4.0], vec![f64::MIN_POSITIVE, -0.0, 1e300]).unwrap();
    g.write(&path).unwrap();
    assert_eq!(GridFile::read(&path).unwrap(), g);
    assert!(GridFile::read(&dir.path().join("missing.bin")).is_err());
}

#[test]
fn constant_grid_is_uniform() {
    let g = GridFile::new(4, 5, [0.0; 4], vec![0.0; 20]).unwrap();
    let ppm = render_ppm(&g, &RenderOptions::default());
    assert!(ppm.starts_with(b"P6\n5 4\n255\n"));
    let px = pixels(&ppm);
    assert_eq!(px.len(), 60);
    assert!(px.chunks(3).all(|c| c == &px[..3]));
}

#[test]
fn gray_ramp_is_monotone() {
    let g = GridFile::new(1, 256, [0.0; 4], (0..256).map(|i| i as f64).collect()).unwrap();
    let opts = RenderOptions {
        scale: Scale::Linear,
        color_map: ColorMap::Gray,
    };
    let px = pixels(&render_ppm(&g, &opts)).to_vec();
    assert_eq!(px[0], 0);
    assert_eq!(px[px.len() - 1], 255);
    assert!(px.chunks(3).map(|c| c[0]).collect::<Vec<_>>().windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn signed_data_centre_on_zero() {
    let g = GridFile::new(1, 3, [0.0; 4], vec![-1.0, 0.0, 0.5]).unwrap();
    let opts = RenderOptions {
        scale: Scale::Linear,
        color_map: ColorMap::Diverging,
    };
    let px = pixels(&render_ppm(&g, &opts)).to_vec();
    assert_eq!(&px[3..6], &ColorMap::Diverging.color(0.5));
}

#[test]
fn symlog_lifts_small_values() {
    let g = GridFile::new(1, 3, [0.0; 4], vec![0.0, 1e-4, 1.0]).unwrap();
    let gray = |scale| {
        let opts = RenderOptions {
            scale,
            color_map: ColorMap::Gray,
        };
        pixels(&render_ppm(&g, &opts))[3]
    };
    assert_eq!(gray(Scale::Linear), 0);
    assert!(gray(Scale::SymLog { linthresh: 1e-3 }) > 0);
}

#[test]
fn colour_maps_parse() {
    assert_eq!(ColorMap::parse("viridis"), Some(ColorMap::Viridis));
    assert_eq!(ColorMap::parse("gray"), Some(ColorMap::Gray));
    assert_eq!(ColorMap::parse("diverging"), Some(ColorMap::Diverging));
    assert_eq!(ColorMap::parse("rainbow"), None);
}

#[test]
fn csv_tables_have_headers() {
    let s = spectrum_csv(&[1.0, 2.0], &[0.5, 0.25], 2.0);
    assert_eq!(s, "dk_over_q,probability_density\n5e-1,5e-1\n1e0,2.5e-1\n");
    let t = table_csv(&["a", "b"], &[vec![1.0, -2.0]]);
    assert_eq!(t, "a,b\n1e0,-2e0\n");
}

proptest! {
    #[test]
    fn grid_bytes_round_trip(
        rows in 1usize..12,
        cols in 1usize..12,
        bounds in prop::array::uniform4(-1e6f64..1e6),
        seed in prop::collection::vec(-1e12f64..1e12, 144),
    ) {
        let g = GridFile::new(rows, cols, bounds, seed[..rows * cols].to_vec()).unwrap();
        let back = GridFile::from_bytes(&g.to_bytes()).unwrap();
        prop_assert_eq!(&back, &g);
        let opts = RenderOptions { scale: Scale::SymLog { linthresh: 1e-3 }, color_map: ColorMap::Viridis };
        let a = render_ppm(&g, &opts);
        prop_assert_eq!(pixels(&a).len(), 3 * rows * cols);
        prop_assert_eq!(a, render_ppm(&back, &opts));
    }
}
