//! Rebuilds the train/test split table of the combined recognition corpus
//! from per-dataset manifests and summarises label statistics.

use darkbench::evalkit::{dataset_stats, split_table, Manifest, ManifestRecord, ESTR_SPLIT, LSTR_SPLITS};
use darkbench::synth::random_word;
use darkbench::RngSeed;

fn manifest(prefix: &str, n: usize, seed: u64) -> Manifest {
    Manifest::new(
        (0..n)
            .map(|i| ManifestRecord {
                path: format!("{prefix}/{i:05}.jpg"),
                label: random_word(RngSeed(seed), i as u64),
            })
            .collect(),
    )
    .expect("unique paths")
}

fn main() {
    let parts: Vec<(&str, Manifest, Manifest)> = LSTR_SPLITS
        .iter()
        .enumerate()
        .map(|(i, (name, train, test))| {
            (
                *name,
                manifest(&format!("{name}/train"), *train, 2 * i as u64),
                manifest(&format!("{name}/test"), *test, 2 * i as u64 + 1),
            )
        })
        .collect();
    let table = split_table(parts.iter().map(|(n, tr, te)| (*n, tr, te)));
    println!("{table}\n");

    let (name, train, test) = ESTR_SPLIT;
    let (tr, te) = (manifest("estr/train", train, 90), manifest("estr/test", test, 91));
    println!("{}\n", split_table([(name, &tr, &te)]));

    let all = Manifest::concat(parts.iter().flat_map(|(_, tr, te)| [tr, te])).expect("disjoint");
    let stats = dataset_stats(&all);
    println!("{} images, {} characters, charset {:?}", stats.n_images, stats.total_chars, stats.charset);
    for (len, n) in &stats.length_histogram {
        println!("  length {len}: {n}");
    }
}
