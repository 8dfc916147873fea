mod common;

use chaoscipher::{keygen, parse_key, serialize_key, CipherKey, KeyParams, SeededEntropy, XPrimeMode};
use proptest::prelude::*;

#[test]
fn fixture_key_file() {
    let expected = CipherKey::new(16, 16, &[0xffbf], XPrimeMode::Derived, 0x20, 0xb, 0x13).unwrap();
    assert_eq!(common::fixture_key(), expected);
    assert_eq!(serialize_key(&expected).as_bytes(), common::fixture("key16.key"));

    // Same entropy as `keygen --entropy fixed:DEADBEEFCAFEF00D`.
    let params = KeyParams { m: 16, k: 16, rounds: 1, dummy_len: 32, independent_xprime: false };
    let regenerated = keygen(params, &mut SeededEntropy::new(&hex::decode("DEADBEEFCAFEF00D").unwrap())).unwrap();
    assert_eq!(regenerated, expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn serialize_parse_identity(m in 4u32..=32, k in 4u32..=32, n in 1u32..=4, extra in 1u32..200,
                                indep in any::<bool>(), seed in any::<[u8; 8]>()) {
        let params = KeyParams { m, k, rounds: n, dummy_len: n + extra, independent_xprime: indep };
        let key = keygen(params, &mut SeededEntropy::new(&seed)).unwrap();
        let text = serialize_key(&key);
        prop_assert!(text.is_ascii() && !text.contains('\r'));
        prop_assert_eq!(parse_key(&text).unwrap(), key);
    }
}
