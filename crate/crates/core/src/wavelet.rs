//! Analysis / synthesis filter banks for the supported wavelet families.
//!
//! Taps are literal double-precision constants. The high-pass filters use
//! the sign convention `hi_d[k] = (-1)^k * lo_r[k]` and
//! `hi_r[k] = -(-1)^k * lo_d[k]`, so the Haar analysis high-pass is
//! `[1/√2, -1/√2]`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Haar,
    Daubechies,
    Symlet,
    Coiflet,
    Biorthogonal,
    ReverseBiorthogonal,
}

impl Family {
    pub fn is_orthonormal(self) -> bool {
        !matches!(self, Family::Biorthogonal | Family::ReverseBiorthogonal)
    }

    fn prefix(self) -> &'static str {
        match self {
            Family::Haar => "haar",
            Family::Daubechies => "db",
            Family::Symlet => "sym",
            Family::Coiflet => "coif",
            Family::Biorthogonal => "bior",
            Family::ReverseBiorthogonal => "rbio",
        }
    }
}

/// One shipped wavelet. Biorthogonal orders are written as two digits
/// (reconstruction order, decomposition order), so `bior3.5` has order 35.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Wavelet {
    pub family: Family,
    pub order: u8,
}

impl Wavelet {
    pub const HAAR: Wavelet = Wavelet { family: Family::Haar, order: 1 };
    pub const DB5: Wavelet = Wavelet { family: Family::Daubechies, order: 5 };
    pub const SYM4: Wavelet = Wavelet { family: Family::Symlet, order: 4 };
    pub const COIF3: Wavelet = Wavelet { family: Family::Coiflet, order: 3 };
    pub const BIOR3_5: Wavelet = Wavelet { family: Family::Biorthogonal, order: 35 };
    pub const RBIO3_5: Wavelet = Wavelet { family: Family::ReverseBiorthogonal, order: 35 };

    pub const ALL: [Wavelet; 6] = [
        Wavelet::HAAR,
        Wavelet::DB5,
        Wavelet::SYM4,
        Wavelet::COIF3,
        Wavelet::BIOR3_5,
        Wavelet::RBIO3_5,
    ];

    pub fn bank(self) -> Result<FilterBank> {
        filter_bank(self.family, self.order)
    }
}

impl fmt::Display for Wavelet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Haar => f.write_str("haar"),
            Family::Biorthogonal | Family::ReverseBiorthogonal => write!(
                f,
                "{}{}.{}",
                self.family.prefix(),
                self.order / 10,
                self.order % 10
            ),
            _ => write!(f, "{}{}", self.family.prefix(), self.order),
        }
    }
}

impl FromStr for Wavelet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let name = s.trim().to_ascii_lowercase();
        let found = Wavelet::ALL.into_iter().find(|w| w.to_string() == name);
        match found {
            Some(w) => Ok(w),
            // db1 is the same filter as haar
            None if name == "db1" => Ok(Wavelet::HAAR),
            None => Err(Error::UnsupportedWavelet(format!(
                "{s:?} (supported: haar, db5, sym4, coif3, bior3.5, rbio3.5)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub wavelet: Wavelet,
    pub lo_d: &'static [f64],
    pub hi_d: &'static [f64],
    pub lo_r: &'static [f64],
    pub hi_r: &'static [f64],
}

impl FilterBank {
    pub fn family(&self) -> Family {
        self.wavelet.family
    }

    /// Tap count; every filter in a shipped bank has the same length.
    pub fn len(&self) -> usize {
        self.lo_d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo_d.is_empty()
    }
}

pub fn filter_bank(family: Family, order: u8) -> Result<FilterBank> {
    let (lo_d, hi_d, lo_r, hi_r): (&[f64], &[f64], &[f64], &[f64]) = match (family, order) {
        (Family::Haar, 1) | (Family::Daubechies, 1) => (&HAAR_LO_D, &HAAR_HI_D, &HAAR_LO_R, &HAAR_HI_R),
        (Family::Daubechies, 5) => (&DB5_LO_D, &DB5_HI_D, &DB5_LO_R, &DB5_HI_R),
        (Family::Symlet, 4) => (&SYM4_LO_D, &SYM4_HI_D, &SYM4_LO_R, &SYM4_HI_R),
        (Family::Coiflet, 3) => (&COIF3_LO_D, &COIF3_HI_D, &COIF3_LO_R, &COIF3_HI_R),
        (Family::Biorthogonal, 35) => (&BIOR3_5_LO_D, &BIOR3_5_HI_D, &BIOR3_5_LO_R, &BIOR3_5_HI_R),
        (Family::ReverseBiorthogonal, 35) => {
            (&RBIO3_5_LO_D, &RBIO3_5_HI_D, &RBIO3_5_LO_R, &RBIO3_5_HI_R)
        }
        _ => {
            return Err(Error::UnsupportedWavelet(format!(
                "{family:?} order {order}"
            )))
        }
    };
    let family = if family == Family::Daubechies && order == 1 {
        Family::Haar
    } else {
        family
    };
    Ok(FilterBank {
        wavelet: Wavelet { family, order },
        lo_d,
        hi_d,
        lo_r,
        hi_r,
    })
}

const HAAR_LO_D: [f64; 2] = [
    FRAC_1_SQRT_2,
    FRAC_1_SQRT_2,
];

const HAAR_HI_D: [f64; 2] = [
    FRAC_1_SQRT_2,
    -FRAC_1_SQRT_2,
];

const HAAR_LO_R: [f64; 2] = [
    FRAC_1_SQRT_2,
    FRAC_1_SQRT_2,
];

const HAAR_HI_R: [f64; 2] = [
    -FRAC_1_SQRT_2,
    FRAC_1_SQRT_2,
];

const DB5_LO_D: [f64; 10] = [
    0.0033357252854737712,
    -0.012580751999081999,
    -0.006241490212798274,
    0.07757149384004572,
    -0.032244869584638375,
    -0.24229488706638203,
    0.13842814590132074,
    0.7243085284377729,
    0.6038292697971896,
    0.16010239797419293,
];

const DB5_HI_D: [f64; 10] = [
    0.16010239797419293,
    -0.6038292697971896,
    0.7243085284377729,
    -0.13842814590132074,
    -0.24229488706638203,
    0.032244869584638375,
    0.07757149384004572,
    0.006241490212798274,
    -0.012580751999081999,
    -0.0033357252854737712,
];

const DB5_LO_R: [f64; 10] = [
    0.16010239797419293,
    0.6038292697971896,
    0.7243085284377729,
    0.13842814590132074,
    -0.24229488706638203,
    -0.032244869584638375,
    0.07757149384004572,
    -0.006241490212798274,
    -0.012580751999081999,
    0.0033357252854737712,
];

const DB5_HI_R: [f64; 10] = [
    -0.0033357252854737712,
    -0.012580751999081999,
    0.006241490212798274,
    0.07757149384004572,
    0.032244869584638375,
    -0.24229488706638203,
    -0.13842814590132074,
    0.7243085284377729,
    -0.6038292697971896,
    0.16010239797419293,
];

const SYM4_LO_D: [f64; 8] = [
    -0.07576571478927333,
    -0.02963552764599851,
    0.49761866763201545,
    0.8037387518059161,
    0.29785779560527736,
    -0.09921954357684722,
    -0.012603967262037833,
    0.0322231006040427,
];

const SYM4_HI_D: [f64; 8] = [
    0.0322231006040427,
    0.012603967262037833,
    -0.09921954357684722,
    -0.29785779560527736,
    0.8037387518059161,
    -0.49761866763201545,
    -0.02963552764599851,
    0.07576571478927333,
];

const SYM4_LO_R: [f64; 8] = [
    0.0322231006040427,
    -0.012603967262037833,
    -0.09921954357684722,
    0.29785779560527736,
    0.8037387518059161,
    0.49761866763201545,
    -0.02963552764599851,
    -0.07576571478927333,
];

const SYM4_HI_R: [f64; 8] = [
    0.07576571478927333,
    -0.02963552764599851,
    -0.49761866763201545,
    0.8037387518059161,
    -0.29785779560527736,
    -0.09921954357684722,
    0.012603967262037833,
    0.0322231006040427,
];

const COIF3_LO_D: [f64; 18] = [
    -3.459977319727278e-05,
    -7.0983302506379e-05,
    0.0004662169598204029,
    0.0011175187708306303,
    -0.0025745176881367972,
    -0.009007976136730624,
    0.015880544863669452,
    0.03455502757329774,
    -0.08230192710629983,
    -0.07179982161915484,
    0.42848347637737,
    0.7937772226260872,
    0.40517690240911824,
    -0.06112339000297255,
    -0.06577191128146936,
    0.023452696142077168,
    0.007782596425672746,
    -0.003793512864380802,
];

const COIF3_HI_D: [f64; 18] = [
    -0.003793512864380802,
    -0.007782596425672746,
    0.023452696142077168,
    0.06577191128146936,
    -0.06112339000297255,
    -0.40517690240911824,
    0.7937772226260872,
    -0.42848347637737,
    -0.07179982161915484,
    0.08230192710629983,
    0.03455502757329774,
    -0.015880544863669452,
    -0.009007976136730624,
    0.0025745176881367972,
    0.0011175187708306303,
    -0.0004662169598204029,
    -7.0983302506379e-05,
    3.459977319727278e-05,
];

const COIF3_LO_R: [f64; 18] = [
    -0.003793512864380802,
    0.007782596425672746,
    0.023452696142077168,
    -0.06577191128146936,
    -0.06112339000297255,
    0.40517690240911824,
    0.7937772226260872,
    0.42848347637737,
    -0.07179982161915484,
    -0.08230192710629983,
    0.03455502757329774,
    0.015880544863669452,
    -0.009007976136730624,
    -0.0025745176881367972,
    0.0011175187708306303,
    0.0004662169598204029,
    -7.0983302506379e-05,
    -3.459977319727278e-05,
];

const COIF3_HI_R: [f64; 18] = [
    3.459977319727278e-05,
    -7.0983302506379e-05,
    -0.0004662169598204029,
    0.0011175187708306303,
    0.0025745176881367972,
    -0.009007976136730624,
    -0.015880544863669452,
    0.03455502757329774,
    0.08230192710629983,
    -0.07179982161915484,
    -0.42848347637737,
    0.7937772226260872,
    -0.40517690240911824,
    -0.06112339000297255,
    0.06577191128146936,
    0.023452696142077168,
    -0.007782596425672746,
    -0.003793512864380802,
];

const BIOR3_5_LO_D: [f64; 12] = [
    -0.013810679320049757,
    0.04143203796014927,
    0.052480581416189075,
    -0.26792717880896527,
    -0.07181553246425873,
    0.966747552403483,
    0.966747552403483,
    -0.07181553246425873,
    -0.26792717880896527,
    0.052480581416189075,
    0.04143203796014927,
    -0.013810679320049757,
];

const BIOR3_5_HI_D: [f64; 12] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.1767766952966369,
    -0.5303300858899106,
    0.5303300858899106,
    -0.1767766952966369,
    0.0,
    0.0,
    0.0,
    0.0,
];

const BIOR3_5_LO_R: [f64; 12] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.1767766952966369,
    0.5303300858899106,
    0.5303300858899106,
    0.1767766952966369,
    0.0,
    0.0,
    0.0,
    0.0,
];

const BIOR3_5_HI_R: [f64; 12] = [
    0.013810679320049757,
    0.04143203796014927,
    -0.052480581416189075,
    -0.26792717880896527,
    0.07181553246425873,
    0.966747552403483,
    -0.966747552403483,
    -0.07181553246425873,
    0.26792717880896527,
    0.052480581416189075,
    -0.04143203796014927,
    -0.013810679320049757,
];

const RBIO3_5_LO_D: [f64; 12] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.1767766952966369,
    0.5303300858899106,
    0.5303300858899106,
    0.1767766952966369,
    0.0,
    0.0,
    0.0,
    0.0,
];

const RBIO3_5_HI_D: [f64; 12] = [
    -0.013810679320049757,
    -0.04143203796014927,
    0.052480581416189075,
    0.26792717880896527,
    -0.07181553246425873,
    -0.966747552403483,
    0.966747552403483,
    0.07181553246425873,
    -0.26792717880896527,
    -0.052480581416189075,
    0.04143203796014927,
    0.013810679320049757,
];

const RBIO3_5_LO_R: [f64; 12] = [
    -0.013810679320049757,
    0.04143203796014927,
    0.052480581416189075,
    -0.26792717880896527,
    -0.07181553246425873,
    0.966747552403483,
    0.966747552403483,
    -0.07181553246425873,
    -0.26792717880896527,
    0.052480581416189075,
    0.04143203796014927,
    -0.013810679320049757,
];

const RBIO3_5_HI_R: [f64; 12] = [
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1767766952966369,
    0.5303300858899106,
    -0.5303300858899106,
    0.1767766952966369,
    0.0,
    0.0,
    0.0,
    0.0,
];
