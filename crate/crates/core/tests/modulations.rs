use pyramid_oac::modulations::{generate, min_distance, ModulationKind, ModulationSpec};

const KINDS: [ModulationKind; 4] = [ModulationKind::Qam, ModulationKind::Pam, ModulationKind::Hex, ModulationKind::Psk];

#[test]
fn unit_average_power_and_distinct_points() {
    for kind in KINDS {
        for q in [2usize, 4, 8, 16, 32, 64, 128, 1024] {
            let c = match generate(ModulationSpec::new(kind, q)) {
                Ok(c) => c,
                // square-only QAM sizes etc. are reported as errors
                Err(_) => continue,
            };
            assert_eq!(c.len(), q);
            assert!((c.average_power() - 1.0).abs() < 1e-12, "{kind}{q}");
            assert!(min_distance(&c) > 1e-9, "{kind}{q}");
        }
    }
}

#[test]
fn supported_sizes() {
    for q in [4usize, 16, 32, 64, 256] {
        assert!(generate(ModulationSpec::new(ModulationKind::Qam, q)).is_ok(), "qam{q}");
    }
    for kind in [ModulationKind::Pam, ModulationKind::Hex, ModulationKind::Psk] {
        for q in [2usize, 3, 5, 16, 64] {
            assert!(generate(ModulationSpec::new(kind, q)).is_ok(), "{kind}{q}");
        }
    }
    assert!(generate(ModulationSpec::new(ModulationKind::Pam, 1)).is_err());
}

#[test]
fn distances_order_as_expected() {
    let d = |kind, q| min_distance(&generate(ModulationSpec::new(kind, q)).unwrap());
    // square QAM: spacing 2 / sqrt(2(M-1)/3)
    assert!((d(ModulationKind::Qam, 16) - 2.0 / 10f64.sqrt()).abs() < 1e-12);
    // PAM: spacing 2 / sqrt((M²-1)/3)
    assert!((d(ModulationKind::Pam, 8) - 2.0 / 21f64.sqrt()).abs() < 1e-12);
    for q in [16, 64] {
        assert!(d(ModulationKind::Hex, q) > d(ModulationKind::Qam, q) * 0.99);
        assert!(d(ModulationKind::Qam, q) > d(ModulationKind::Pam, q));
    }
}

#[test]
fn names_parse() {
    for kind in KINDS {
        assert_eq!(kind.to_string().parse::<ModulationKind>().unwrap(), kind);
    }
    assert!("ook".parse::<ModulationKind>().is_err());
}
