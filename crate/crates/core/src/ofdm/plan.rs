//! 802.11a subcarrier layout and the two synchronization words.

use num_complex::Complex64;

pub const FFT_SIZE: usize = 64;
pub const CP_LEN: usize = 16;
pub const SYMBOL_LEN: usize = FFT_SIZE + CP_LEN;
pub const N_DATA: usize = 48;
pub const N_PILOT: usize = 4;

/// Role of one subcarrier label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    Data,
    Pilot,
    Null,
}

/// Which labels carry data, pilots or nothing. Labels run from -32 to 31.
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierPlan {
    pub data_labels: Vec<i32>,
    pub pilot_labels: [i32; N_PILOT],
    pub pilot_values: [f64; N_PILOT],
    pub null_labels: Vec<i32>,
}

impl Default for CarrierPlan {
    fn default() -> Self {
        Self::ieee80211a()
    }
}

impl CarrierPlan {
    pub fn ieee80211a() -> Self {
        let pilot_labels = [-21, -7, 7, 21];
        let data_labels = (-26..=26)
            .filter(|&l| l != 0 && !pilot_labels.contains(&l))
            .collect();
        let null_labels = (-32..=-27).chain([0]).chain(27..=31).collect();
        Self {
            data_labels,
            pilot_labels,
            pilot_values: [1.0, 1.0, 1.0, -1.0],
            null_labels,
        }
    }

    pub fn classify(&self, label: i32) -> Carrier {
        if self.pilot_labels.contains(&label) {
            Carrier::Pilot
        } else if self.data_labels.contains(&label) {
            Carrier::Data
        } else {
            Carrier::Null
        }
    }

    /// Labels carrying energy in data symbols, ascending.
    pub fn active_labels(&self) -> Vec<i32> {
        (-32..32)
            .filter(|&l| self.classify(l) != Carrier::Null)
            .collect()
    }
}

/// FFT bin holding a subcarrier label.
pub fn bin(label: i32) -> usize {
    label.rem_euclid(FFT_SIZE as i32) as usize
}

/// Subcarrier label held in an FFT bin.
pub fn label(bin: usize) -> i32 {
    let b = bin as i32;
    if b >= FFT_SIZE as i32 / 2 {
        b - FFT_SIZE as i32
    } else {
        b
    }
}

/// Amplitude of each component of the first sync word. Its energy sits on
/// half the carriers, so it is boosted to make the repetition easy to find.
pub const SYNC1_AMPLITUDE: f64 = std::f64::consts::SQRT_2;

// QPSK signs for the even labels -26, -24, .., -2, 2, .., 26.
const SYNC1_SIGNS: [(i8, i8); 26] = [
    (1, 1), (-1, 1), (1, -1), (1, 1), (-1, 1), (-1, -1), (1, 1), (-1, 1), (-1, 1),
    (1, -1), (-1, -1), (-1, -1), (1, -1), (-1, -1), (-1, -1), (-1, -1), (1, -1),
    (-1, 1), (-1, -1), (1, 1), (-1, 1), (-1, 1), (1, 1), (-1, -1), (-1, 1), (1, 1),
];

// QPSK signs for all 52 labels -26..=26 excluding 0.
const SYNC2_SIGNS: [(i8, i8); 52] = [
    (-1, 1), (1, -1), (-1, 1), (-1, 1), (-1, -1), (1, 1), (-1, -1), (1, -1), (-1, -1),
    (-1, 1), (1, -1), (-1, 1), (-1, 1), (-1, 1), (-1, 1), (1, 1), (1, 1), (1, -1),
    (-1, -1), (-1, -1), (-1, 1), (-1, -1), (-1, 1), (1, -1), (1, 1), (1, 1), (-1, 1),
    (1, -1), (1, 1), (1, -1), (-1, -1), (-1, 1), (-1, -1), (1, -1), (1, -1), (1, -1),
    (1, 1), (-1, -1), (-1, 1), (1, 1), (1, -1), (1, -1), (-1, -1), (-1, -1), (-1, 1),
    (-1, 1), (1, 1), (-1, 1), (1, 1), (1, 1), (1, -1), (-1, -1),
];

/// First sync word in FFT-bin order: energy on even labels only, so its time
/// domain repeats every 32 samples.
pub fn sync_word_1() -> [Complex64; FFT_SIZE] {
    let mut out = [Complex64::new(0.0, 0.0); FFT_SIZE];
    let labels = (-26..=26).filter(|l: &i32| *l != 0 && l % 2 == 0);
    for (l, (re, im)) in labels.zip(SYNC1_SIGNS) {
        out[bin(l)] = Complex64::new(re as f64, im as f64) * SYNC1_AMPLITUDE;
    }
    out
}

/// Second sync word in FFT-bin order: unit-energy QPSK on all 52 active labels.
pub fn sync_word_2() -> [Complex64; FFT_SIZE] {
    let mut out = [Complex64::new(0.0, 0.0); FFT_SIZE];
    let labels = (-26..=26).filter(|l: &i32| *l != 0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for (l, (re, im)) in labels.zip(SYNC2_SIGNS) {
        out[bin(l)] = Complex64::new(re as f64 * s, im as f64 * s);
    }
    out
}
