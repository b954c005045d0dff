use std::path::Path;

use super::reports::{ImageStats, LossReport, PrtReport, StatsReport, XentReport};
use super::{
    env_seed, manifest_dir, print_json, resolve_config, write_json, CerArgs, EnhanceArgs, LossArgs,
    PrtArgs, StatsArgs, SweepArgs, XentArgs,
};
use crate::enhance::{aac_apply, AacParams, Validation};
use crate::error::{Error, Result};
use crate::evalkit::{
    brightness_stats, cer_report, darkness_sweep, dataset_stats, CerMode, CerOptions, Manifest,
    PredictionSet,
};
use crate::imgcore::{load_image, save_image, ImageBuf, RngSeed};
use crate::losses::{edge_content_loss, ocr_cross_entropy, parse_targets, LogitsMatrix};
use crate::render::{
    prt_shaded, render_oracle, transport_to_sh, Direction, EnvMap, Occluder, SurfacePoint,
};

pub(super) fn enhance(a: EnhanceArgs) -> Result<i32> {
    if a.method != "aac" {
        return Err(Error::param(format!("unknown method {:?}; available: aac", a.method)));
    }
    let validation = if a.relaxed {
        Validation::Relaxed
    } else {
        Validation::Strict
    };
    let img = load_image(&a.input)?;
    let params = match (&a.params, a.alpha, a.beta) {
        (Some(p), _, _) => AacParams::load(p, validation)?,
        (None, Some(alpha), Some(beta)) => {
            AacParams::uniform(a.iterations, img.channels(), alpha, beta, validation)?
        }
        _ => return Err(Error::param("give --params FILE or both --alpha and --beta")),
    };
    let out = aac_apply(&img, &params)?;
    save_image(&out, &a.output)?;
    let (before, after) = (brightness_stats(&img).mean, brightness_stats(&out).mean);
    println!("mean luma {before:.6} -> {after:.6}");
    Ok(0)
}

pub(super) fn loss(a: LossArgs) -> Result<i32> {
    if !(a.phi >= 0.0) {
        return Err(Error::param(format!("--phi must be >= 0, got {}", a.phi)));
    }
    let low = load_image(&a.low)?;
    let out = load_image(&a.output)?;
    let l = edge_content_loss(&out, &low)?;
    let report = LossReport {
        edge_content_loss: l,
        phi: a.phi,
        weighted: a.phi * l,
    };
    if a.json {
        print_json(&report)?;
    } else {
        println!("L_EC {}", report.edge_content_loss);
        println!("phi*L_EC {}", report.weighted);
    }
    Ok(0)
}

pub(super) fn xent(a: XentArgs) -> Result<i32> {
    let z = LogitsMatrix::load(&a.logits)?;
    let text = std::fs::read_to_string(&a.targets).map_err(|e| Error::io(&a.targets, e))?;
    let y = parse_targets(&text)?;
    let report = XentReport {
        cross_entropy: ocr_cross_entropy(&z, &y)?,
        tokens: z.n_tokens(),
        vocab: z.vocab(),
    };
    if a.json {
        print_json(&report)?;
    } else {
        println!("L_OCR {}", report.cross_entropy);
    }
    Ok(0)
}

pub(super) fn cer(a: CerArgs) -> Result<i32> {
    let manifest = Manifest::load(&a.manifest)?;
    let preds = PredictionSet::load(&a.preds)?;
    let opts = CerOptions {
        mode: if a.lenient {
            CerMode::Lenient
        } else {
            CerMode::Strict
        },
        casefold: a.casefold,
        per_sample_mean: a.per_sample_mean,
    };
    let report = cer_report(&manifest, &preds, &opts)?;
    if a.json {
        print_json(&report)?;
    } else {
        println!("CER {:.2}", report.cer);
        println!("edits {} / {} reference chars over {} records", report.edits, report.reference_chars, report.records);
        if !report.missing.is_empty() {
            println!("missing predictions {}", report.missing.len());
        }
    }
    Ok(0)
}

pub(super) fn stats(a: StatsArgs) -> Result<i32> {
    let dataset = match &a.manifest {
        Some(p) => Some(dataset_stats(&Manifest::load(p)?)),
        None => None,
    };
    let images = a
        .image
        .iter()
        .map(|p| {
            let img = load_image(p)?;
            Ok(ImageStats {
                path: p.display().to_string(),
                width: img.width(),
                height: img.height(),
                channels: img.channels(),
                brightness: brightness_stats(&img),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = StatsReport { dataset, images };
    if a.json {
        return print_json(&report).map(|_| 0);
    }
    if let Some(d) = &report.dataset {
        println!("images {}", d.n_images);
        println!("characters {} ({} distinct)", d.total_chars, d.charset.chars().count());
        println!("charset {}", d.charset);
        for (len, n) in &d.length_histogram {
            println!("length {len:>3} {n}");
        }
    }
    for s in &report.images {
        let b = s.brightness;
        println!(
            "{} mean {:.4} median {:.4} p5 {:.4} p95 {:.4}",
            s.path, b.mean, b.median, b.p5, b.p95
        );
    }
    Ok(0)
}

fn load_manifest_images(manifest: &Manifest, root: &Path) -> Result<Vec<ImageBuf>> {
    manifest
        .records()
        .iter()
        .map(|r| load_image(root.join(&r.path)))
        .collect()
}

pub(super) fn sweep(a: SweepArgs) -> Result<i32> {
    let base = resolve_config(&a.config)?;
    let manifest = Manifest::load(&a.manifest)?;
    let images = load_manifest_images(&manifest, &manifest_dir(&a.manifest))?;
    let preds = a
        .preds
        .iter()
        .map(PredictionSet::load)
        .collect::<Result<Vec<_>>>()?;
    if !preds.is_empty() && preds.len() != a.k.len() {
        return Err(Error::param(format!(
            "got {} --preds files for {} k levels",
            preds.len(),
            a.k.len()
        )));
    }
    let report = darkness_sweep(
        &manifest,
        &images,
        &base,
        &a.k,
        (!preds.is_empty()).then_some(preds.as_slice()),
    )?;
    match &a.output {
        Some(path) => {
            write_json(&report, path)?;
            println!("{:>6} {:>10} {:>10} {:>12} {:>8}", "k", "mean", "median", "edge_loss", "cer");
            for l in &report.levels {
                let cer = l.cer.map_or("-".to_string(), |c| format!("{c:.2}"));
                println!(
                    "{:>6} {:>10.5} {:>10.5} {:>12.6} {:>8}",
                    l.k, l.mean_luma, l.median_luma, l.edge_loss, cer
                );
            }
        }
        None => print_json(&report)?,
    }
    Ok(0)
}

fn parse_reals(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::param(format!("{what}: invalid number {t:?}")))
        })
        .collect()
}

fn parse_direction(v: &[f64], what: &str) -> Result<Direction> {
    match v {
        [x, y, z, ..] => Direction::new(*x, *y, *z),
        _ => Err(Error::param(format!("{what}: expected x,y,z"))),
    }
}

pub(super) fn prt_demo(a: PrtArgs) -> Result<i32> {
    let seed = RngSeed(match a.seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    });
    let env = match &a.env {
        Some(p) => EnvMap::load(p)?,
        None => EnvMap::constant(64, 32, 1, a.env_constant)?,
    };
    let normal = parse_direction(&parse_reals(&a.normal, "--normal")?, "--normal")?;
    let mut point = SurfacePoint::new(normal, 1.0);
    point.albedo = parse_reals(&a.albedo, "--albedo")?;
    for o in &a.occluder {
        let v = parse_reals(o, "--occluder")?;
        if v.len() != 4 {
            return Err(Error::param("--occluder: expected x,y,z,degrees"));
        }
        point = point.with_occluder(Occluder::from_degrees(parse_direction(&v, "--occluder")?, v[3]));
    }

    let t = transport_to_sh(&point, a.order, a.samples, seed)?;
    let env_sh = env.project_sh(a.order);
    let shaded = prt_shaded(&t, &env_sh, &point.albedo)?;
    let raw = env_sh
        .iter()
        .map(|e| crate::render::prt_radiance(&t, e))
        .collect::<Result<Vec<_>>>()?;
    let oracle = render_oracle(&env, &point, a.quad_steps)?;
    let relative_error = shaded
        .iter()
        .zip(&oracle)
        .map(|(p, o)| {
            if *o == 0.0 {
                p.abs()
            } else {
                (p - o).abs() / o.abs()
            }
        })
        .fold(0.0, f64::max);
    let report = PrtReport {
        order: a.order,
        samples: a.samples,
        seed: seed.0,
        normal: normal.to_array(),
        albedo: point.albedo.clone(),
        occluders: point.occluders.len(),
        quad_steps: a.quad_steps,
        prt_radiance: raw,
        prt_shaded: shaded,
        oracle_radiance: oracle,
        relative_error,
    };
    if a.json {
        print_json(&report)?;
    } else {
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ");
        println!("prt_radiance {}", fmt(&report.prt_radiance));
        println!("prt_shaded {}", fmt(&report.prt_shaded));
        println!("oracle_radiance {}", fmt(&report.oracle_radiance));
        println!("relative_error {:.6}", report.relative_error);
    }
    Ok(0)
}
