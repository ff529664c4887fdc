//! Transmit chain: tag, header, map, MUX, carrier allocation, IFFT, CP, gain.

use num_complex::Complex64;

use super::{
    bin, check_len, generate_header, ifft64, sync_word_1, sync_word_2, CarrierPlan, IqBuffer,
    Modulation, OfdmError, CP_LEN, FFT_SIZE, HEADER_LEN, N_DATA, SYMBOL_LEN,
};

pub const PAYLOAD_LEN: usize = 96;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedPayload {
    pub bytes: [u8; PAYLOAD_LEN],
    pub frame_index: u32,
}

impl TaggedPayload {
    pub fn new(bytes: [u8; PAYLOAD_LEN], frame_index: u32) -> Self {
        Self { bytes, frame_index }
    }
}

/// Zero-pads to a multiple of 96 bytes and cuts into indexed payloads.
pub fn tag_stream(data: &[u8]) -> Vec<TaggedPayload> {
    data.chunks(PAYLOAD_LEN)
        .enumerate()
        .map(|(i, chunk)| {
            let mut bytes = [0u8; PAYLOAD_LEN];
            bytes[..chunk.len()].copy_from_slice(chunk);
            TaggedPayload::new(bytes, i as u32)
        })
        .collect()
}

/// Splits a byte into four 2-bit values, least significant pair first.
pub fn repack_bits(b: u8) -> [u8; 4] {
    std::array::from_fn(|i| (b >> (2 * i)) & 0b11)
}

pub fn map_bpsk(b: u8) -> Result<Complex64, OfdmError> {
    match b {
        0 => Ok(Complex64::new(-1.0, 0.0)),
        1 => Ok(Complex64::new(1.0, 0.0)),
        _ => Err(OfdmError::InvalidSymbol(b)),
    }
}

pub fn map_qpsk(b: u8) -> Result<Complex64, OfdmError> {
    if b > 3 {
        return Err(OfdmError::InvalidSymbol(b));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re = if b & 1 != 0 { s } else { -s };
    let im = if b & 2 != 0 { s } else { -s };
    Ok(Complex64::new(re, im))
}

/// Maps a payload onto constellation points. BPSK takes bits LSB first.
pub fn modulate_payload(bytes: &[u8; PAYLOAD_LEN], modulation: Modulation) -> Vec<Complex64> {
    match modulation {
        Modulation::Bpsk => bytes
            .iter()
            .flat_map(|&b| (0..8).map(move |i| (b >> i) & 1))
            .map(|bit| map_bpsk(bit).unwrap())
            .collect(),
        Modulation::Qpsk => bytes
            .iter()
            .flat_map(|&b| repack_bits(b))
            .map(|q| map_qpsk(q).unwrap())
            .collect(),
    }
}

/// Header symbols first, then payload symbols.
pub fn mux(
    header_syms: &[Complex64],
    payload_syms: &[Complex64],
    modulation: Modulation,
) -> Result<Vec<Complex64>, OfdmError> {
    check_len("header symbols", HEADER_LEN, header_syms.len())?;
    check_len("payload symbols", modulation.payload_symbols(), payload_syms.len())?;
    Ok([header_syms, payload_syms].concat())
}

/// Builds the frequency-domain vectors: the two sync words, then one vector
/// per 48 data symbols with pilots inserted and nulls left at zero.
pub fn allocate_carriers(
    syms: &[Complex64],
    plan: &CarrierPlan,
    sync_words: &[[Complex64; FFT_SIZE]; 2],
) -> Result<Vec<[Complex64; FFT_SIZE]>, OfdmError> {
    let known = [Modulation::Qpsk, Modulation::Bpsk].map(|m| m.frame_symbols());
    if !known.contains(&syms.len()) {
        return Err(OfdmError::LengthMismatch {
            what: "muxed symbols",
            expected: known[0],
            got: syms.len(),
        });
    }
    let mut out = sync_words.to_vec();
    for chunk in syms.chunks(N_DATA) {
        let mut v = [Complex64::new(0.0, 0.0); FFT_SIZE];
        for (&l, &s) in plan.data_labels.iter().zip(chunk) {
            v[bin(l)] = s;
        }
        for (&l, &p) in plan.pilot_labels.iter().zip(&plan.pilot_values) {
            v[bin(l)] = Complex64::new(p, 0.0);
        }
        out.push(v);
    }
    Ok(out)
}

pub fn add_cp(sym: &[Complex64]) -> Result<[Complex64; SYMBOL_LEN], OfdmError> {
    check_len("symbol", FFT_SIZE, sym.len())?;
    let mut out = [Complex64::new(0.0, 0.0); SYMBOL_LEN];
    out[..CP_LEN].copy_from_slice(&sym[FFT_SIZE - CP_LEN..]);
    out[CP_LEN..].copy_from_slice(sym);
    Ok(out)
}

pub fn apply_gain(buf: &IqBuffer, g: f64) -> Result<IqBuffer, OfdmError> {
    if !(g > 0.0) {
        return Err(OfdmError::NonPositiveGain(g));
    }
    let g = g as f32;
    Ok(IqBuffer {
        samples: buf.samples.iter().map(|s| s * g).collect(),
        sample_rate_hz: buf.sample_rate_hz,
    })
}

pub fn transmit_frame(
    p: &TaggedPayload,
    modulation: Modulation,
    plan: &CarrierPlan,
    gain: f64,
) -> Result<IqBuffer, OfdmError> {
    let header: Vec<Complex64> = generate_header(p)
        .iter()
        .map(|&b| map_bpsk(b))
        .collect::<Result<_, _>>()?;
    let payload = modulate_payload(&p.bytes, modulation);
    let syms = mux(&header, &payload, modulation)?;
    let vectors = allocate_carriers(&syms, plan, &[sync_word_1(), sync_word_2()])?;
    let mut samples = Vec::with_capacity(vectors.len() * SYMBOL_LEN);
    for v in &vectors {
        samples.extend(add_cp(&ifft64(v)?)?);
    }
    apply_gain(&IqBuffer::from_c64(samples), gain)
}
