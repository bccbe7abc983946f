#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Node attributes of the synthetic legislature, one row per node.
pub struct Member {
    pub id: String,
    pub party: &'static str,
    pub chamber: &'static str,
}

/// Writes a legislature-like network with party and chamber homophily:
/// `edges.csv` (weights are each source's share of its out-ties) and
/// `attrs.csv` with every attribute column.
pub fn synthetic_dataset(dir: &Path, n: usize, seed: u64) -> (PathBuf, PathBuf, Vec<Member>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members: Vec<Member> = (0..n)
        .map(|i| Member {
            id: format!("M{i:03}"),
            party: if i == n - 1 { "Independent" } else if i % 2 == 0 { "Democrat" } else { "Republican" },
            chamber: if i % 5 == 0 { "Upper" } else { "Lower" },
        })
        .collect();

    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (&members[i], &members[j]);
            let mut p: f64 = 0.03;
            if a.party == b.party {
                p += 0.2;
            }
            if a.chamber == b.chamber {
                p += 0.1;
            }
            if rng.gen::<f64>() < p {
                out[i].push(j);
            }
        }
        if out[i].is_empty() {
            out[i].push((i + 1) % n);
        }
    }
    let mut edges = String::from("source,target,weight\n");
    for (i, targets) in out.iter().enumerate() {
        let w = 1.0 / targets.len() as f64;
        for &j in targets {
            let _ = writeln!(edges, "{},{},{w}", members[i].id, members[j].id);
        }
    }

    let mut attrs = String::from("node_id,party,chamber,state,race,ethnicity,religion,sex,lgbtq,age,tenure\n");
    let races = ["White", "Black", "Asiatic", "Native American", "Other"];
    for (i, m) in members.iter().enumerate() {
        let _ = writeln!(
            attrs,
            "{},{},{},S{},{},{},{},{},{},{},{}",
            m.id,
            m.party,
            m.chamber,
            i % 7,
            races[i % races.len()],
            if i % 6 == 0 { "Hispanic" } else { "Not Hispanic" },
            if i % 4 == 0 { "Other" } else { "Christian" },
            if i % 3 == 0 { "Female" } else { "Male" },
            if i % 11 == 0 { "Yes" } else { "No" },
            30 + rng.gen_range(0..50),
            1 + rng.gen_range(0..30),
        );
    }
    let e = dir.join("edges.csv");
    let a = dir.join("attrs.csv");
    std::fs::write(&e, edges).unwrap();
    std::fs::write(&a, attrs).unwrap();
    (e, a, members)
}
