//! Hot group-arithmetic kernels for `vvote`.
//!
//! Every function takes and returns canonical byte encodings so the Python
//! layer never sees curve internals. Scalars are 32-byte little-endian and
//! must already be reduced modulo the relevant group order.

use bls12_381::hash_to_curve::{ExpandMsgXmd, HashToCurve};
use bls12_381::{multi_miller_loop, G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt};
use curve25519_dalek::constants::RISTRETTO_BASEPOINT_TABLE;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::{Identity, VartimeMultiscalarMul};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

fn err(msg: &str) -> PyErr {
    PyValueError::new_err(msg.to_string())
}

fn arr32(b: &[u8], what: &str) -> PyResult<[u8; 32]> {
    b.try_into().map_err(|_| err(&format!("{what}: expected 32 bytes")))
}

fn r_scalar(b: &[u8]) -> PyResult<Scalar> {
    Option::from(Scalar::from_canonical_bytes(arr32(b, "scalar")?))
        .ok_or_else(|| err("scalar: not canonical"))
}

fn r_point(b: &[u8]) -> PyResult<RistrettoPoint> {
    CompressedRistretto::from_slice(b)
        .map_err(|_| err("point: expected 32 bytes"))?
        .decompress()
        .ok_or_else(|| err("point: invalid ristretto255 encoding"))
}

fn out<'py>(py: Python<'py>, p: &RistrettoPoint) -> Bound<'py, PyBytes> {
    PyBytes::new(py, p.compress().as_bytes())
}

#[pyfunction]
fn r255_basemul<'py>(py: Python<'py>, s: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
    let s = r_scalar(s)?;
    Ok(out(py, &(RISTRETTO_BASEPOINT_TABLE * &s)))
}

#[pyfunction]
fn r255_mul<'py>(py: Python<'py>, p: &[u8], s: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
    let (p, s) = (r_point(p)?, r_scalar(s)?);
    Ok(out(py, &(p * s)))
}

#[pyfunction]
fn r255_add<'py>(py: Python<'py>, p: &[u8], q: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
    Ok(out(py, &(r_point(p)? + r_point(q)?)))
}

#[pyfunction]
fn r255_sub<'py>(py: Python<'py>, p: &[u8], q: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
    Ok(out(py, &(r_point(p)? - r_point(q)?)))
}

#[pyfunction]
fn r255_is_valid(p: &[u8]) -> bool {
    r_point(p).is_ok()
}

#[pyfunction]
fn r255_from_uniform<'py>(py: Python<'py>, b: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
    let b: [u8; 64] = b.try_into().map_err(|_| err("from_uniform: expected 64 bytes"))?;
    Ok(out(py, &RistrettoPoint::from_uniform_bytes(&b)))
}

/// Sum of points[i] * scalars[i].
#[pyfunction]
fn r255_lincomb<'py>(
    py: Python<'py>,
    points: Vec<Vec<u8>>,
    scalars: Vec<Vec<u8>>,
) -> PyResult<Bound<'py, PyBytes>> {
    if points.len() != scalars.len() {
        return Err(err("lincomb: length mismatch"));
    }
    if points.is_empty() {
        return Ok(out(py, &RistrettoPoint::identity()));
    }
    let ps = points.iter().map(|p| r_point(p)).collect::<PyResult<Vec<_>>>()?;
    let ss = scalars.iter().map(|s| r_scalar(s)).collect::<PyResult<Vec<_>>>()?;
    Ok(out(py, &RistrettoPoint::vartime_multiscalar_mul(ss.iter(), ps.iter())))
}

/// ElGamal encryption of each (message, randomness) pair: (r*G, m + r*pk).
#[pyfunction]
fn elgamal_encrypt_batch<'py>(
    py: Python<'py>,
    pk: &[u8],
    msgs: Vec<Vec<u8>>,
    rands: Vec<Vec<u8>>,
) -> PyResult<Vec<(Bound<'py, PyBytes>, Bound<'py, PyBytes>)>> {
    if msgs.len() != rands.len() {
        return Err(err("encrypt: length mismatch"));
    }
    let pk = r_point(pk)?;
    let ms = msgs.iter().map(|m| r_point(m)).collect::<PyResult<Vec<_>>>()?;
    let rs = rands.iter().map(|r| r_scalar(r)).collect::<PyResult<Vec<_>>>()?;
    let cts: Vec<([u8; 32], [u8; 32])> = py.detach(|| {
        ms.iter()
            .zip(rs.iter())
            .map(|(m, r)| {
                let c1 = RISTRETTO_BASEPOINT_TABLE * r;
                let c2 = m + pk * r;
                (c1.compress().to_bytes(), c2.compress().to_bytes())
            })
            .collect()
    });
    Ok(cts
        .iter()
        .map(|(a, b)| (PyBytes::new(py, a), PyBytes::new(py, b)))
        .collect())
}

/// Re-randomisation of each ciphertext: (c1 + r*G, c2 + r*pk).
#[pyfunction]
fn elgamal_reencrypt_batch<'py>(
    py: Python<'py>,
    pk: &[u8],
    cts: Vec<(Vec<u8>, Vec<u8>)>,
    rands: Vec<Vec<u8>>,
) -> PyResult<Vec<(Bound<'py, PyBytes>, Bound<'py, PyBytes>)>> {
    if cts.len() != rands.len() {
        return Err(err("reencrypt: length mismatch"));
    }
    let pk = r_point(pk)?;
    let cs = cts
        .iter()
        .map(|(a, b)| Ok((r_point(a)?, r_point(b)?)))
        .collect::<PyResult<Vec<_>>>()?;
    let rs = rands.iter().map(|r| r_scalar(r)).collect::<PyResult<Vec<_>>>()?;
    let res: Vec<([u8; 32], [u8; 32])> = py.detach(|| {
        cs.iter()
            .zip(rs.iter())
            .map(|((a, b), r)| {
                let c1 = a + RISTRETTO_BASEPOINT_TABLE * r;
                let c2 = b + pk * r;
                (c1.compress().to_bytes(), c2.compress().to_bytes())
            })
            .collect()
    });
    Ok(res
        .iter()
        .map(|(a, b)| (PyBytes::new(py, a), PyBytes::new(py, b)))
        .collect())
}

// ---------------------------------------------------------------------------
// BLS12-381, signatures in G1 and keys in G2.

fn g1(b: &[u8]) -> PyResult<G1Affine> {
    let a: [u8; 48] = b.try_into().map_err(|_| err("G1: expected 48 bytes"))?;
    Option::from(G1Affine::from_compressed(&a)).ok_or_else(|| err("G1: invalid encoding"))
}

fn g2(b: &[u8]) -> PyResult<G2Affine> {
    let a: [u8; 96] = b.try_into().map_err(|_| err("G2: expected 96 bytes"))?;
    Option::from(G2Affine::from_compressed(&a)).ok_or_else(|| err("G2: invalid encoding"))
}

fn b_scalar(b: &[u8]) -> PyResult<bls12_381::Scalar> {
    Option::from(bls12_381::Scalar::from_bytes(&arr32(b, "scalar")?))
        .ok_or_else(|| err("scalar: not canonical"))
}

fn hash_g1(msg: &[u8], dst: &[u8]) -> G1Projective {
    <G1Projective as HashToCurve<ExpandMsgXmd<sha2::Sha256>>>::hash_to_curve(msg, dst)
}

#[pyfunction]
fn bls_hash_to_g1<'py>(py: Python<'py>, msg: &[u8], dst: &[u8]) -> Bound<'py, PyBytes> {
    PyBytes::new(py, &G1Affine::from(hash_g1(msg, dst)).to_compressed())
}

#[pyfunction]
fn bls_g2_basemul<'py>(py: Python<'py>, s: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
    let s = b_scalar(s)?;
    Ok(PyBytes::new(py, &G2Affine::from(G2Affine::generator() * s).to_compressed()))
}

#[pyfunction]
fn bls_sign<'py>(py: Python<'py>, s: &[u8], msg: &[u8], dst: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
    let s = b_scalar(s)?;
    let sig = py.detach(|| G1Affine::from(hash_g1(msg, dst) * s).to_compressed());
    Ok(PyBytes::new(py, &sig))
}

#[pyfunction]
fn bls_verify(py: Python<'_>, pk: &[u8], msg: &[u8], sig: &[u8], dst: &[u8]) -> bool {
    let (pk, sig) = match (g2(pk), g1(sig)) {
        (Ok(pk), Ok(sig)) => (pk, sig),
        _ => return false,
    };
    py.detach(|| {
        let h = G1Affine::from(hash_g1(msg, dst));
        let neg_g = G2Prepared::from(-G2Affine::generator());
        let pk = G2Prepared::from(pk);
        multi_miller_loop(&[(&sig, &neg_g), (&h, &pk)]).final_exponentiation() == Gt::identity()
    })
}

#[pyfunction]
fn bls_g1_lincomb<'py>(
    py: Python<'py>,
    points: Vec<Vec<u8>>,
    scalars: Vec<Vec<u8>>,
) -> PyResult<Bound<'py, PyBytes>> {
    if points.len() != scalars.len() {
        return Err(err("lincomb: length mismatch"));
    }
    let mut acc = G1Projective::identity();
    for (p, s) in points.iter().zip(scalars.iter()) {
        acc += G1Projective::from(g1(p)?) * b_scalar(s)?;
    }
    Ok(PyBytes::new(py, &G1Affine::from(acc).to_compressed()))
}

#[pyfunction]
fn bls_g2_lincomb<'py>(
    py: Python<'py>,
    points: Vec<Vec<u8>>,
    scalars: Vec<Vec<u8>>,
) -> PyResult<Bound<'py, PyBytes>> {
    if points.len() != scalars.len() {
        return Err(err("lincomb: length mismatch"));
    }
    let mut acc = G2Projective::identity();
    for (p, s) in points.iter().zip(scalars.iter()) {
        acc += G2Projective::from(g2(p)?) * b_scalar(s)?;
    }
    Ok(PyBytes::new(py, &G2Affine::from(acc).to_compressed()))
}

#[pymodule]
fn _native(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(r255_basemul, m)?)?;
    m.add_function(wrap_pyfunction!(r255_mul, m)?)?;
    m.add_function(wrap_pyfunction!(r255_add, m)?)?;
    m.add_function(wrap_pyfunction!(r255_sub, m)?)?;
    m.add_function(wrap_pyfunction!(r255_is_valid, m)?)?;
    m.add_function(wrap_pyfunction!(r255_from_uniform, m)?)?;
    m.add_function(wrap_pyfunction!(r255_lincomb, m)?)?;
    m.add_function(wrap_pyfunction!(elgamal_encrypt_batch, m)?)?;
    m.add_function(wrap_pyfunction!(elgamal_reencrypt_batch, m)?)?;
    m.add_function(wrap_pyfunction!(bls_hash_to_g1, m)?)?;
    m.add_function(wrap_pyfunction!(bls_g2_basemul, m)?)?;
    m.add_function(wrap_pyfunction!(bls_sign, m)?)?;
    m.add_function(wrap_pyfunction!(bls_verify, m)?)?;
    m.add_function(wrap_pyfunction!(bls_g1_lincomb, m)?)?;
    m.add_function(wrap_pyfunction!(bls_g2_lincomb, m)?)?;
    m.add("BACKEND", "native")?;
    Ok(())
}
