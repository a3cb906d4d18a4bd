use serde::Serialize;
use twopoint::dsp::{bandpass_sections, notch_section, DcRemoval, BAND_HIGH_HZ, BAND_LOW_HZ, NOTCH_HZ, NOTCH_WIDTH_HZ, STREAMING_DC_CUTOFF_HZ};
use twopoint::dsp::design::{butterworth_highpass, Biquad};
use twopoint::synth::io::write_dataset;
use twopoint::SAMPLE_RATE;

use super::required;
use crate::cli::{DspArgs, SynthArgs};
use crate::config::{RunConfig, RUN_FILE};
use crate::error::{CliError, Result};
use crate::files::create_dir;

pub fn synth(cfg: &mut RunConfig, a: SynthArgs) -> Result<()> {
    cfg.command = "synth".into();
    let s = &mut cfg.synth;
    if let Some(v) = a.subjects {
        s.subjects = v;
    }
    if let Some(v) = a.reps {
        s.reps = v;
    }
    if let Some(v) = a.duration {
        s.duration_s = v;
    }
    if let Some(v) = a.artifacts {
        s.artifacts = v;
    }
    if let Some(v) = a.noise_floor {
        s.noise_floor = v;
    }
    if let Some(v) = a.cross_talk {
        s.cross_talk = v;
    }
    if let Some(v) = a.jitter {
        s.jitter = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if a.out.is_some() {
        cfg.paths.out = a.out;
    }
    let out = required(cfg.paths.out.clone(), "--out DIR")?;
    let cohort = cfg.synth.cohort(cfg.seed)?;
    // normalize the artifact spelling in the written config
    cfg.synth.artifacts = cohort.artifacts.to_string();
    create_dir(&out)?;
    let manifest = write_dataset(&out, &cohort)?;
    cfg.write(&out.join(RUN_FILE))?;
    println!(
        "wrote {} records for {} subjects to {}",
        manifest.records.len(),
        cohort.subjects,
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct FilterDump {
    sample_rate: f64,
    offline_dc: DcRemoval,
    streaming_dc: DcRemoval,
    streaming_dc_sections: Vec<Biquad>,
    band_hz: [f64; 2],
    bandpass_sections: Vec<Biquad>,
    notch_hz: f64,
    notch_width_hz: f64,
    notch_section: Biquad,
}

pub fn dsp(a: DspArgs) -> Result<()> {
    if !a.dump_coeffs {
        return Err(CliError::Usage("nothing to do (try --dump-coeffs)".into()));
    }
    let dump = FilterDump {
        sample_rate: SAMPLE_RATE,
        offline_dc: DcRemoval::RecordMean,
        streaming_dc: DcRemoval::streaming(),
        streaming_dc_sections: butterworth_highpass(1, STREAMING_DC_CUTOFF_HZ, SAMPLE_RATE),
        band_hz: [BAND_LOW_HZ, BAND_HIGH_HZ],
        bandpass_sections: bandpass_sections(SAMPLE_RATE),
        notch_hz: NOTCH_HZ,
        notch_width_hz: NOTCH_WIDTH_HZ,
        notch_section: notch_section(SAMPLE_RATE),
    };
    println!("{}", serde_json::to_string_pretty(&dump).expect("filter dump serializes"));
    Ok(())
}
