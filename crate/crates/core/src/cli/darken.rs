use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::reports::{FileFailure, FileProvenance, RunProvenance};
use super::{manifest_dir, resolve_config, write_json, DarkenArgs};
use crate::degrade::{darken_pipeline, DarkenConfig};
use crate::error::{Error, Result};
use crate::evalkit::Manifest;
use crate::imgcore::{load_image, save_image};

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "dbf"];

/// (input path, output path relative to the output dir)
type Job = (PathBuf, PathBuf);

pub(super) fn run(args: DarkenArgs) -> Result<i32> {
    let cfg = resolve_config(&args.config)?;
    let jobs = if args.input.is_dir() {
        list_dir(&args.input)?
    } else if args.input.is_file() {
        let m = Manifest::load(&args.input)?;
        let root = manifest_dir(&args.input);
        m.records()
            .iter()
            .map(|r| (root.join(&r.path), PathBuf::from(&r.path)))
            .collect()
    } else {
        return Err(Error::io(
            &args.input,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ));
    };
    std::fs::create_dir_all(&args.output).map_err(|e| Error::io(&args.output, e))?;

    let results: Vec<std::result::Result<FileProvenance, FileFailure>> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, (input, rel))| {
            process(i as u64, input, rel, &args.output, &cfg).map_err(|e| FileFailure {
                index: i as u64,
                input: input.display().to_string(),
                error: e.to_string(),
            })
        })
        .collect();
    let (mut files, mut failures) = (Vec::new(), Vec::new());
    for r in results {
        match r {
            Ok(f) => files.push(f),
            Err(f) => failures.push(f),
        }
    }
    for f in &failures {
        eprintln!("failed: {}: {}", f.input, f.error);
    }
    let prov = RunProvenance {
        tool: "darkbench".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.to_map(),
        master_seed: cfg.seed.0,
        files,
        failures,
    };
    write_json(&prov, &args.output.join("provenance.json"))?;
    println!(
        "darkened {} of {} images into {}",
        prov.files.len(),
        jobs.len(),
        args.output.display()
    );
    Ok(if prov.failures.is_empty() { 0 } else { 1 })
}

fn list_dir(dir: &Path) -> Result<Vec<Job>> {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if path.is_file() && is_image {
            names.push(PathBuf::from(path.file_name().expect("listed file has a name")));
        }
    }
    names.sort();
    Ok(names.into_iter().map(|n| (dir.join(&n), n)).collect())
}

fn process(index: u64, input: &Path, rel: &Path, out_dir: &Path, cfg: &DarkenConfig) -> Result<FileProvenance> {
    if rel.is_absolute() || rel.components().any(|c| c == std::path::Component::ParentDir) {
        return Err(Error::Manifest(format!(
            "{} escapes the output directory",
            rel.display()
        )));
    }
    let bytes = std::fs::read(input).map_err(|e| Error::io(input, e))?;
    let img = load_image(input)?;
    let item = cfg.for_item(index);
    let dark = darken_pipeline(&img, &item)?;
    let output = out_dir.join(rel);
    if let Some(parent) = output.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    save_image(&dark, &output)?;
    let written = std::fs::read(&output).map_err(|e| Error::io(&output, e))?;
    Ok(FileProvenance {
        index,
        input: input.display().to_string(),
        output: output.display().to_string(),
        seed: item.seed.0,
        blurred: item.blur_applies(),
        input_sha256: hex::encode(Sha256::digest(&bytes)),
        output_sha256: hex::encode(Sha256::digest(&written)),
    })
}
