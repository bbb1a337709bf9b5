//! Regenerate the bundled synthetic GCC-style panel.
//!
//! The committed `data/gcc_panel.csv` is NOT a World Development Indicators
//! extract (the raw extract is not redistributable); it is a seeded
//! synthetic panel calibrated to GCC development levels, documented in
//! `data/README.md`. Rerunning this example rewrites the file byte for
//! byte:
//!
//! ```text
//! cargo run --example generate_panel
//! ```
//!
//! Construction, per country:
//! - Four component series (life expectancy, mean and expected schooling,
//!   GNI per capita) follow smooth ramps with most growth before 2016, a
//!   plateau afterwards, a small 2020 dip, and light observation noise.
//! - The target HDI series is composed from those components with the
//!   default goalposts, so the panel contains genuinely informative
//!   predictors.
//! - Twenty-two further indicators are correlates (smooth transforms of the
//!   same development progress), saturation curves, or volatile series with
//!   no signal; several have missing years, and one is observed in too few
//!   years to ever qualify for ranking.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use hdicast::data_model::{hdi_compose, HdiGoalposts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const FIRST_YEAR: i32 = 1996;
const N_YEARS: usize = 27; // 1996..=2022
const SEED: u64 = 42;
const TARGET: &str = "UNDP.HDI.XD";

/// Fraction of each component's 1996->2022 move completed by year index
/// `i`: linear to 85% through 2015, then a slow tail (the plateau that
/// makes held-out 2019-2022 predictable for a non-extrapolating learner).
fn progress(i: usize) -> f64 {
    if i <= 19 {
        0.85 * i as f64 / 19.0
    } else {
        0.85 + 0.15 * (i - 19) as f64 / 7.0
    }
}

/// 2020 pandemic-style shocks, recovering by 2022.
fn life_dip(i: usize) -> f64 {
    match i {
        24 => -0.9,
        25 => -0.45,
        _ => 0.0,
    }
}

fn gni_dip(i: usize) -> f64 {
    match i {
        24 => 0.92,
        25 => 0.97,
        _ => 1.0,
    }
}

struct CountryShape {
    code: &'static str,
    life: (f64, f64),
    mys: (f64, f64),
    eys: (f64, f64),
    gni: (f64, f64),
    pop0: f64,
    pop_growth: f64,
}

const COUNTRIES: [CountryShape; 6] = [
    CountryShape {
        code: "ARE",
        life: (72.5, 79.2),
        mys: (8.0, 12.7),
        eys: (11.5, 16.2),
        gni: (55_000.0, 74_000.0),
        pop0: 2.6e6,
        pop_growth: 0.055,
    },
    CountryShape {
        code: "BHR",
        life: (73.0, 79.0),
        mys: (7.5, 11.4),
        eys: (12.5, 16.3),
        gni: (34_000.0, 52_000.0),
        pop0: 0.58e6,
        pop_growth: 0.035,
    },
    CountryShape {
        code: "KWT",
        life: (72.0, 79.5),
        mys: (6.5, 10.0),
        eys: (12.0, 15.3),
        gni: (62_000.0, 67_000.0),
        pop0: 1.6e6,
        pop_growth: 0.038,
    },
    CountryShape {
        code: "OMN",
        life: (70.0, 78.0),
        mys: (5.5, 9.9),
        eys: (11.0, 14.5),
        gni: (26_000.0, 34_000.0),
        pop0: 2.2e6,
        pop_growth: 0.028,
    },
    CountryShape {
        code: "QAT",
        life: (74.0, 79.3),
        mys: (7.0, 10.5),
        eys: (11.5, 13.5),
        gni: (75_000.0, 92_000.0),
        pop0: 0.5e6,
        pop_growth: 0.065,
    },
    CountryShape {
        code: "SAU",
        life: (70.5, 77.9),
        mys: (7.5, 11.3),
        eys: (11.0, 15.0),
        gni: (38_000.0, 52_000.0),
        pop0: 18.5e6,
        pop_growth: 0.025,
    },
];

fn ramp(lo: f64, hi: f64, i: usize) -> f64 {
    lo + (hi - lo) * progress(i)
}

/// Logistic saturation curve in calendar years.
fn s_curve(i: usize, lo: f64, hi: f64, midpoint_year: f64, width: f64) -> f64 {
    let year = FIRST_YEAR as f64 + i as f64;
    lo + (hi - lo) / (1.0 + (-(year - midpoint_year) / width).exp())
}

struct Series {
    indicator: &'static str,
    /// `None` entries are omitted from the CSV (missing observations).
    values: Vec<Option<f64>>,
    /// Decimal places written to the CSV.
    decimals: usize,
}

fn dense(indicator: &'static str, decimals: usize, values: Vec<f64>) -> Series {
    Series {
        indicator,
        values: values.into_iter().map(Some).collect(),
        decimals,
    }
}

/// Blank out `holes` years, drawn without replacement from 1997-2021 so the
/// series keeps its endpoints (and therefore its span).
fn punch_holes(series: &mut Series, holes: usize, rng: &mut ChaCha8Rng) {
    let mut punched = 0;
    while punched < holes {
        let i = rng.gen_range(1..N_YEARS - 1);
        if series.values[i].take().is_some() {
            punched += 1;
        }
    }
}

fn main() {
    let goalposts = HdiGoalposts::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let unit_noise = Normal::new(0.0, 1.0).unwrap();
    let noise = |sd: f64, rng: &mut ChaCha8Rng| sd * unit_noise.sample(rng);

    let mut csv = String::from("country,indicator,year,value\n");
    for country in &COUNTRIES {
        // Component paths (full precision drives the HDI composition).
        let mut life = Vec::with_capacity(N_YEARS);
        let mut mys = Vec::with_capacity(N_YEARS);
        let mut eys = Vec::with_capacity(N_YEARS);
        let mut gni = Vec::with_capacity(N_YEARS);
        for i in 0..N_YEARS {
            life.push(ramp(country.life.0, country.life.1, i) + life_dip(i) + noise(0.06, &mut rng));
            mys.push(ramp(country.mys.0, country.mys.1, i) + noise(0.03, &mut rng));
            eys.push(ramp(country.eys.0, country.eys.1, i) + noise(0.05, &mut rng));
            gni.push(ramp(country.gni.0, country.gni.1, i) * gni_dip(i) * (1.0 + noise(0.006, &mut rng)));
        }
        let hdi: Vec<f64> = (0..N_YEARS)
            .map(|i| hdi_compose(life[i], mys[i], eys[i], gni[i], &goalposts).unwrap())
            .collect();

        // Per-country offsets keep the correlate levels distinct.
        let gdp_factor = 1.0 + rng.gen_range(0.02..0.10);
        let literacy0 = 76.0 + rng.gen_range(0.0..4.0);
        let urban0 = 74.0 + rng.gen_range(0.0..12.0);
        let energy0 = 5500.0 + rng.gen_range(0.0..3000.0);
        let co2_0 = 18.0 + rng.gen_range(0.0..14.0);

        let mut series: Vec<Series> = Vec::new();
        series.push(dense(TARGET, 6, hdi.clone()));
        series.push(dense("SP.DYN.LE00.IN", 2, life.clone()));
        series.push(dense("BAR.SCHL.15UP", 2, mys.clone()));
        series.push(dense("SE.SCH.LIFE", 2, eys.clone()));
        series.push(dense("NY.GNP.PCAP.PP.CD", 1, gni.clone()));

        let gen = |f: &mut dyn FnMut(usize, &mut ChaCha8Rng) -> f64, rng: &mut ChaCha8Rng| {
            (0..N_YEARS).map(|i| f(i, rng)).collect::<Vec<f64>>()
        };

        series.push(dense(
            "NY.GNP.PCAP.PP.KD",
            1,
            gen(&mut |i, r| gni[i] * (1.0 + noise(0.004, r)), &mut rng),
        ));
        series.push(dense(
            "NY.GDP.PCAP.CD",
            1,
            gen(&mut |i, r| gni[i] * gdp_factor * (1.0 + noise(0.02, r)), &mut rng),
        ));
        series.push(dense(
            "SP.DYN.IMRT.IN",
            1,
            gen(&mut |i, r| 12.0 - 7.5 * progress(i) + noise(0.15, r), &mut rng),
        ));
        let mut literacy = dense(
            "SE.ADT.LITR.ZS",
            1,
            gen(&mut |i, r| (literacy0 + 18.0 * progress(i) + noise(0.3, r)).min(99.5), &mut rng),
        );
        punch_holes(&mut literacy, 12, &mut rng);
        series.push(literacy);
        series.push(dense(
            "SE.PRM.ENRR",
            1,
            gen(&mut |i, r| 92.0 + 6.0 * progress(i) + noise(1.2, r), &mut rng),
        ));
        series.push(dense(
            "SE.SEC.ENRR",
            1,
            gen(&mut |i, r| 80.0 + 15.0 * progress(i) + noise(1.6, r), &mut rng),
        ));
        series.push(dense(
            "SE.TER.ENRR",
            1,
            gen(&mut |i, r| 18.0 + 30.0 * progress(i) + noise(1.8, r), &mut rng),
        ));
        series.push(dense(
            "SH.XPD.CHEX.PC.CD",
            1,
            gen(&mut |i, r| (600.0 + 1400.0 * progress(i)) * (1.0 + noise(0.04, r)), &mut rng),
        ));
        series.push(dense(
            "IT.NET.USER.ZS",
            2,
            gen(
                &mut |i, r| (s_curve(i, 0.2, 99.0, 2006.0, 2.8) + noise(0.8, r)).clamp(0.0, 100.0),
                &mut rng,
            ),
        ));
        series.push(dense(
            "IT.CEL.SETS.P2",
            2,
            gen(
                &mut |i, r| (s_curve(i, 1.0, 190.0, 2004.5, 2.2) + noise(2.5, r)).max(0.0),
                &mut rng,
            ),
        ));
        let mut urban = dense(
            "SP.URB.TOTL.IN.ZS",
            2,
            gen(&mut |i, r| urban0 + 10.0 * progress(i) + noise(0.25, r), &mut rng),
        );
        punch_holes(&mut urban, 2, &mut rng);
        series.push(urban);
        series.push(dense(
            "SP.DYN.TFRT.IN",
            2,
            gen(&mut |i, r| 4.2 - 2.2 * progress(i) + noise(0.06, r), &mut rng),
        ));
        series.push(dense(
            "SP.POP.GROW",
            2,
            gen(&mut |i, r| 4.5 - 2.8 * progress(i) + noise(0.7, r), &mut rng),
        ));
        let mut exports = dense(
            "NE.EXP.GNFS.ZS",
            2,
            gen(
                &mut |i, r| {
                    let shock = if i == 24 { -7.0 } else { 0.0 };
                    55.0 + 8.0 * ((i as f64) * 0.9).sin() + shock + noise(3.0, r)
                },
                &mut rng,
            ),
        );
        punch_holes(&mut exports, 2, &mut rng);
        series.push(exports);
        series.push(dense(
            "NY.GDP.MKTP.KD.ZG",
            2,
            gen(
                &mut |i, r| {
                    let shock = match i {
                        24 => -7.0,
                        25 => 3.5,
                        _ => 0.0,
                    };
                    3.0 + shock + noise(2.8, r)
                },
                &mut rng,
            ),
        ));
        series.push(dense(
            "FP.CPI.TOTL.ZG",
            2,
            gen(&mut |_i, r| 2.0 + noise(2.2, r), &mut rng),
        ));
        series.push(dense(
            "SL.UEM.TOTL.ZS",
            2,
            gen(&mut |i, r| 2.2 + 0.8 * progress(i) + noise(0.5, r), &mut rng),
        ));
        series.push(dense(
            "EG.USE.PCAP.KG.OE",
            1,
            gen(
                &mut |i, r| (energy0 + 3000.0 * progress(i)) * (1.0 + noise(0.04, r)),
                &mut rng,
            ),
        ));
        series.push(dense(
            "EN.ATM.CO2E.PC",
            2,
            gen(&mut |i, r| (co2_0 + 8.0 * progress(i)) * (1.0 + noise(0.06, r)), &mut rng),
        ));
        // Observed in only eight years: never reaches the ten-year overlap
        // needed to enter the ranking.
        let mut beds = dense(
            "SH.MED.BEDS.ZS",
            2,
            gen(&mut |i, r| 2.1 - 0.2 * progress(i) + noise(0.1, r), &mut rng),
        );
        for i in 0..N_YEARS {
            if !(i >= 4 && i % 3 == 1 && i <= 25) {
                beds.values[i] = None;
            }
        }
        series.push(beds);
        series.push(dense(
            "MS.MIL.XPND.GD.ZS",
            2,
            gen(&mut |_i, r| 6.0 + noise(1.6, r), &mut rng),
        ));
        series.push(dense(
            "SP.POP.TOTL",
            0,
            gen(
                &mut |i, r| country.pop0 * (1.0 + country.pop_growth).powi(i as i32) * (1.0 + noise(0.004, r)),
                &mut rng,
            ),
        ));

        for s in &series {
            for (i, value) in s.values.iter().enumerate() {
                if let Some(v) = value {
                    let year = FIRST_YEAR + i as i32;
                    writeln!(
                        csv,
                        "{},{},{},{:.prec$}",
                        country.code,
                        s.indicator,
                        year,
                        v,
                        prec = s.decimals
                    )
                    .unwrap();
                }
            }
        }
    }

    let out = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/gcc_panel.csv");
    fs::create_dir_all(out.parent().unwrap()).unwrap();
    fs::write(&out, csv).unwrap();
    println!("wrote {}", out.display());
}
