use axmul::error_lab::characterize_wide;
use axmul::hier::*;
use axmul::mul8::{ErMask, Mul8Kind};
use proptest::prelude::*;

fn any_kind() -> impl Strategy<Value = Mul8Kind> {
    prop_oneof![Just(Mul8Kind::Dfm), Just(Mul8Kind::Ssm)]
}

fn any_cfg() -> impl Strategy<Value = HierConfig> {
    (any_kind(), any::<u8>(), any::<u8>(), any::<u8>(), any::<bool>()).prop_map(|(kind, ll, x, hh, recursive)| {
        HierConfig { er_ll: ErMask(ll), er_x: ErMask(x), er_hh: ErMask(hh), recursive, ..HierConfig::exact(kind) }
    })
}

// Word-level oracle for the signed multiply family.
fn oracle(a: u32, b: u32, op: MulOp) -> u32 {
    let (sa, sb) = (a as i32 as i128, b as i32 as i128);
    let (ua, ub) = (a as i128, b as i128);
    let p = match op {
        MulOp::Mul | MulOp::Mulh => sa * sb,
        MulOp::Mulhsu => sa * ub,
        MulOp::Mulhu => ua * ub,
    };
    match op {
        MulOp::Mul => p as u32,
        _ => (p >> 32) as u32,
    }
}

proptest! {
    #[test]
    fn csr_round_trip(raw: u32) {
        prop_assert_eq!(MulCsr::decode(raw).encode(), raw);
    }

    #[test]
    fn disabled_csr_is_exact(raw: u32, a: u32, b: u32, kind in any_kind()) {
        let csr = MulCsr::decode(raw & !1);
        prop_assert_eq!(mul32u_csr(a, b, kind, &csr), a as u128 * b as u128);
    }

    #[test]
    fn exact_config_is_exact(a: u32, b: u32, kind in any_kind(), recursive: bool) {
        let cfg = HierConfig { recursive, ..HierConfig::exact(kind) };
        prop_assert_eq!(mul16(a as u16, b as u16, &cfg), (a as u16 as u64) * (b as u16 as u64));
        prop_assert_eq!(mul32u(a, b, &cfg), a as u128 * b as u128);
        for op in MulOp::ALL {
            prop_assert_eq!(mul_signed(a, b, op, &cfg), oracle(a, b, op));
            prop_assert_eq!(reference_mul(a, b, op), oracle(a, b, op));
        }
    }

    #[test]
    fn ssm_wide_never_undershoots(a: u32, b: u32, cfg in any_cfg()) {
        let cfg = HierConfig { kind: Mul8Kind::Ssm, ..cfg };
        prop_assert!(mul16(a as u16, b as u16, &cfg) >= (a as u16 as u64) * (b as u16 as u64));
        prop_assert!(mul32u(a, b, &cfg) >= a as u128 * b as u128);
    }

    #[test]
    fn zero_operand_wide(a: u32, cfg in any_cfg()) {
        prop_assert_eq!(mul32u(a, 0, &cfg), 0);
        prop_assert_eq!(mul32u(0, a, &cfg), 0);
    }
}

proptest! {
    // Table construction dominates; a few configurations suffice.
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn tabulated_source_matches_direct(a: u32, b: u32, cfg in any_cfg()) {
        let src = TabulatedMul8::new(&cfg);
        prop_assert_eq!(mul32_with(&src, a, b, &cfg), mul32u(a, b, &cfg));
    }
}

#[test]
fn flat_mode_applies_class_field_uniformly() {
    // With only er_hh approximate, flat mode touches only the high x high
    // 16-bit unit, so operands confined to the low halves stay exact.
    let cfg = HierConfig { er_hh: ErMask(0x00), recursive: false, ..HierConfig::exact(Mul8Kind::Ssm) };
    for (a, b) in [(0xFFFFu32, 0xFFFFu32), (0xABCD, 0x1234)] {
        assert_eq!(mul32u(a, b, &cfg), a as u128 * b as u128);
    }
    assert!(mul32u(0xFFFF_0000, 0xFFFF_0000, &cfg) > 0xFFFF_0000u128 * 0xFFFF_0000);
}

#[test]
fn wide_characterization_of_exact_config() {
    for width in [16, 32] {
        let s = characterize_wide(width, &HierConfig::exact(Mul8Kind::Dfm), 20_000, 11).unwrap();
        assert_eq!((s.er_rate, s.mred, s.nmed, s.max_ed), (0.0, 0.0, 0.0, 0));
        assert_eq!(s.n_samples, 20_000);
    }
    let ssm = characterize_wide(32, &HierConfig::uniform(Mul8Kind::Ssm, ErMask(0)), 20_000, 11).unwrap();
    assert!(ssm.min_signed_ed >= 0 && ssm.er_rate > 0.0);
}
