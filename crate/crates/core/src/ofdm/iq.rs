use std::io::{self, Read, Write};
use std::path::Path;

use num_complex::{Complex32, Complex64};

use super::SAMPLE_RATE_HZ;

/// Complex baseband samples, 32-bit float re/im pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct IqBuffer {
    pub samples: Vec<Complex32>,
    pub sample_rate_hz: f64,
}

impl Default for IqBuffer {
    fn default() -> Self {
        Self::new(Vec::new())
    }
}

impl IqBuffer {
    pub fn new(samples: Vec<Complex32>) -> Self {
        Self {
            samples,
            sample_rate_hz: SAMPLE_RATE_HZ,
        }
    }

    pub fn from_c64(samples: impl IntoIterator<Item = Complex64>) -> Self {
        Self::new(
            samples
                .into_iter()
                .map(|c| Complex32::new(c.re as f32, c.im as f32))
                .collect(),
        )
    }

    pub fn to_c64(&self) -> Vec<Complex64> {
        self.samples
            .iter()
            .map(|c| Complex64::new(c.re as f64, c.im as f64))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sum of |x|^2.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr() as f64).sum()
    }

    /// Mean power over the samples that carry signal (non-zero ones).
    pub fn occupied_power(&self) -> f64 {
        let (sum, n) = self
            .samples
            .iter()
            .filter(|c| c.re != 0.0 || c.im != 0.0)
            .fold((0.0, 0usize), |(s, n), c| (s + c.norm_sqr() as f64, n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Appends another buffer, e.g. to build a multi-frame capture.
    pub fn extend(&mut self, other: &IqBuffer) {
        self.samples.extend_from_slice(&other.samples);
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.samples.len() * 8);
        for c in &self.samples {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_le_bytes(bytes: &[u8]) -> io::Result<Self> {
        if bytes.len() % 8 != 0 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("IQ data length {} is not a multiple of 8", bytes.len()),
            ));
        }
        let samples = bytes
            .chunks_exact(8)
            .map(|c| {
                Complex32::new(
                    f32::from_le_bytes(c[..4].try_into().unwrap()),
                    f32::from_le_bytes(c[4..].try_into().unwrap()),
                )
            })
            .collect();
        Ok(Self::new(samples))
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(&self.to_le_bytes())
    }

    pub fn read_from(mut r: impl Read) -> io::Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_le_bytes(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> io::Result<()> {
        std::fs::write(path, self.to_le_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> io::Result<Self> {
        Self::from_le_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_format_is_interleaved_le_f32() {
        let buf = IqBuffer::new(vec![Complex32::new(1.0, -2.0), Complex32::new(0.5, 0.25)]);
        let bytes = buf.to_le_bytes();
        assert_eq!(bytes.len(), 16);
        assert_eq!(&bytes[..4], &1.0f32.to_le_bytes());
        assert_eq!(&bytes[4..8], &(-2.0f32).to_le_bytes());
        assert_eq!(IqBuffer::from_le_bytes(&bytes).unwrap(), buf);
        assert!(IqBuffer::from_le_bytes(&bytes[..7]).is_err());
    }

    #[test]
    fn occupied_power_ignores_zero_padding() {
        let mut s = vec![Complex32::new(0.0, 0.0); 10];
        s.push(Complex32::new(2.0, 0.0));
        assert_eq!(IqBuffer::new(s).occupied_power(), 4.0);
    }
}
