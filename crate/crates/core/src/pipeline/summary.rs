use std::fmt::Write;

use super::RunResults;
use crate::graph::Categorical;
use crate::topology::Metric;

fn num(v: f64, digits: usize) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "Inf".into() } else { "-Inf".into() }
    } else {
        format!("{v:.digits$}")
    }
}

fn stars(p: f64) -> &'static str {
    match p {
        p if p < 0.001 => "***",
        p if p < 0.01 => "**",
        p if p < 0.05 => "*",
        _ => "",
    }
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}|", header.iter().map(|_| "---").collect::<Vec<_>>().join("|"));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out.push('\n');
}

/// Markdown summary of a run. `artifacts` lists the bundle files, which are
/// the only files the summary links to.
pub fn render_summary(results: &RunResults, artifacts: &[String]) -> String {
    let mut s = String::from("# Network analysis report\n\n");
    let stages: Vec<&str> = results.stages.iter().map(|st| st.name()).collect();
    let _ = writeln!(s, "Stages run: {}.\n", stages.join(", "));
    if !results.notices.is_empty() {
        s.push_str("## Notices\n\n");
        for n in &results.notices {
            let _ = writeln!(s, "- {n}");
        }
        s.push('\n');
    }

    if let Some(c) = &results.census {
        s.push_str("## Network\n\n");
        table(
            &mut s,
            &["nodes", "edges", "weak components", "articulation points", "strongly connected"],
            &[vec![
                c.nodes.to_string(),
                c.edges.to_string(),
                c.components.weak_component_sizes.len().to_string(),
                c.components.articulation_points.len().to_string(),
                c.components.is_strongly_connected.to_string(),
            ]],
        );
        if !c.attribute_proportions.is_empty() {
            s.push_str("### Attribute distribution\n\n");
            let rows: Vec<Vec<String>> = c
                .attribute_proportions
                .iter()
                .flat_map(|(a, levels)| levels.iter().map(move |(l, p)| vec![a.clone(), l.clone(), num(*p, 3)]))
                .collect();
            table(&mut s, &["attribute", "level", "share"], &rows);
        }
    }

    if let Some(t) = &results.topology {
        let d = &t.degrees;
        s.push_str("## Degree and strength\n\n");
        table(
            &mut s,
            &["in-degree range", "out-degree range", "mean degree", "out-strength mean", "out-strength sd", "out-strength range"],
            &[vec![
                format!("{}-{}", d.min_in_degree, d.max_in_degree),
                format!("{}-{}", d.min_out_degree, d.max_out_degree),
                num(d.mean_degree, 2),
                num(d.out_strength_mean, 3),
                num(d.out_strength_sd, 3),
                format!("{}-{}", num(d.out_strength_min, 3), num(d.out_strength_max, 3)),
            ]],
        );
        s.push_str("### Top five nodes\n\n");
        let metrics: Vec<Metric> = Metric::ALL
            .into_iter()
            .filter(|m| t.top.iter().any(|r| r.metric == *m))
            .collect();
        let header: Vec<&str> = std::iter::once("rank").chain(metrics.iter().map(|m| m.name())).collect();
        let rows: Vec<Vec<String>> = (1..=5)
            .map(|rank| {
                std::iter::once(rank.to_string())
                    .chain(metrics.iter().map(|m| {
                        t.top
                            .iter()
                            .find(|r| r.metric == *m && r.rank == rank)
                            .map(|r| format!("{} ({})", r.node_id, num(r.value, 3)))
                            .unwrap_or_default()
                    }))
                    .collect()
            })
            .collect();
        table(&mut s, &header, &rows);

        let c = &t.connectivity;
        s.push_str("## Connectivity\n\n");
        table(
            &mut s,
            &["density", "reciprocity", "transitivity", "triad closure", "mean local clustering", "max clique size", "largest cliques"],
            &[vec![
                num(c.density, 4),
                num(c.reciprocity, 4),
                num(c.transitivity, 4),
                num(c.triad_closed_fraction, 4),
                num(c.mean_local_clustering, 4),
                c.max_clique_size.to_string(),
                c.maximal_cliques.len().to_string(),
            ]],
        );
        if !t.group_densities.is_empty() {
            let rows: Vec<Vec<String>> = t
                .group_densities
                .iter()
                .map(|g| vec![g.attribute.name().to_string(), g.level.clone(), g.nodes.to_string(), num(g.density, 3)])
                .collect();
            table(&mut s, &["attribute", "level", "nodes", "density"], &rows);
        }
    }

    if let Some(a) = &results.assortativity {
        s.push_str("## Assortativity\n\n");
        let rows: Vec<Vec<String>> = a
            .entries
            .iter()
            .map(|e| {
                vec![
                    e.variable.clone(),
                    format!("{:?}", e.kind).to_lowercase(),
                    e.coefficient.map(|v| num(v, 3)).unwrap_or_else(|| "undefined".into()),
                ]
            })
            .collect();
        table(&mut s, &["variable", "kind", "coefficient"], &rows);
    }

    if !results.ergm.is_empty() {
        s.push_str("## Exponential random graph models\n\n");
        for m in &results.ergm {
            let f = &m.fit;
            let _ = writeln!(s, "### {} ({:?})\n", m.name, f.method);
            let mut rows: Vec<Vec<String>> = (0..f.k())
                .map(|i| {
                    vec![
                        f.labels[i].clone(),
                        num(f.theta[i], 3),
                        num(f.std_err[i], 3),
                        num(f.p_values[i], 3),
                        stars(f.p_values[i]).to_string(),
                    ]
                })
                .collect();
            rows.push(vec!["AIC".into(), num(f.aic, 1), String::new(), String::new(), String::new()]);
            rows.push(vec!["BIC".into(), num(f.bic, 1), String::new(), String::new(), String::new()]);
            table(&mut s, &["term", "estimate", "std. error", "p", ""], &rows);
        }
        if let Some(cmp) = &results.comparison {
            let _ = writeln!(s, "### Model comparison (reductions relative to {})\n", cmp.reference);
            let rows: Vec<Vec<String>> = cmp
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.name.clone(),
                        r.k.to_string(),
                        num(r.aic, 1),
                        num(r.bic, 1),
                        format!("{}%", num(r.aic_reduction_pct, 1)),
                        format!("{}%", num(r.bic_reduction_pct, 1)),
                    ]
                })
                .collect();
            table(&mut s, &["model", "k", "AIC", "BIC", "AIC reduction", "BIC reduction"], &rows);
        }
        if !results.likelihood_ratio_tests.is_empty() {
            s.push_str("### Likelihood-ratio tests against the edges-only model\n\n");
            let rows: Vec<Vec<String>> = results
                .likelihood_ratio_tests
                .iter()
                .map(|(n, t)| vec![n.clone(), num(t.statistic, 2), t.degrees_of_freedom.to_string(), num(t.p_value, 4)])
                .collect();
            table(&mut s, &["model", "statistic", "df", "p"], &rows);
        }
    }

    if let Some(sbm) = &results.sbm {
        let b = &sbm.best;
        s.push_str("## Stochastic block model\n\n");
        let _ = writeln!(s, "ICL-optimal number of communities: {} (ICL {}).\n", b.q, num(b.icl, 1));
        let mut diag: Vec<f64> = (0..b.q).map(|k| b.pi[k][k]).collect();
        diag.sort_by(|x, y| y.total_cmp(x));
        if diag.len() >= 2 {
            let _ = writeln!(s, "Densest communities: {} and {} within-block tie probability.\n", num(diag[0], 3), num(diag[1], 3));
        }
        let rows: Vec<Vec<String>> = sbm
            .communities
            .rows
            .iter()
            .map(|r| {
                let dom = |a: Categorical| {
                    r.dominant
                        .iter()
                        .find(|d| d.attribute == a)
                        .map(|d| format!("{} ({}%)", d.level, num(100.0 * d.share, 1)))
                        .unwrap_or_default()
                };
                vec![
                    r.community.to_string(),
                    r.size.to_string(),
                    format!("{}%", num(100.0 * r.share, 2)),
                    dom(Categorical::Party),
                    dom(Categorical::Chamber),
                ]
            })
            .collect();
        table(&mut s, &["community", "size", "share", "dominant party", "dominant chamber"], &rows);
    }

    if let Some(t) = &results.scores {
        s.push_str("## Partition agreement\n\n");
        let header: Vec<&str> = std::iter::once("metric").chain(t.columns.iter().map(|(n, _)| n.as_str())).collect();
        let rows: Vec<Vec<String>> = [("Rand", 0), ("ARI", 1), ("NMI", 2)]
            .iter()
            .map(|(name, k)| {
                std::iter::once(name.to_string())
                    .chain(t.columns.iter().map(|(_, sc)| num([sc.rand, sc.adjusted_rand, sc.nmi][*k], 3)))
                    .collect()
            })
            .collect();
        table(&mut s, &header, &rows);
    }

    s.push_str("## Artifacts\n\n");
    for a in artifacts {
        let _ = writeln!(s, "- [{a}]({a})");
    }
    s
}
