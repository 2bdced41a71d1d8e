mod common;

#[test]
fn statevector_norm_preservation() {
    common::statevector_norm().unwrap();
}

#[test]
fn arnoldi_orthonormality() {
    common::arnoldi_orthonormality().unwrap();
}

#[test]
fn realify_round_trip() {
    common::realify_round_trip().unwrap();
}

#[test]
fn mie_self_convergence() {
    common::mie_self_convergence().unwrap();
}

#[test]
fn rcs_oracle_duplication() {
    common::rcs_oracle_duplication().unwrap();
}
