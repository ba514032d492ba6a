//! Plain-text renderings of the result documents.

use std::fmt::Write;

use sdg_core::analytics::{GraphDocument, Hue, SummaryStats, SynthesisReport};
use sdg_core::evaluation::EdgeValue;
use sdg_core::report::{
    MethodReport, PairListing, ReportBundle, Sign, TargetsDocument, VerdictListing,
};

fn value(v: &Option<EdgeValue>) -> String {
    match v {
        Some(EdgeValue::Expert(s)) => format!("{:+}", s.value()),
        Some(EdgeValue::Indicator(c)) => c.to_string(),
        None => "-".into(),
    }
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = xs.into_iter().map(|x| x.to_string()).collect();
    if v.is_empty() {
        "(none)".into()
    } else {
        v.join(", ")
    }
}

pub fn stats(s: &SummaryStats) -> String {
    let mut out = String::new();
    writeln!(out, "method: {}", s.method).unwrap();
    writeln!(
        out,
        "evaluated: {} of {} ({}%)",
        s.evaluated, s.total_pairs, s.evaluated_percent
    )
    .unwrap();
    for c in &s.classes {
        writeln!(
            out,
            "  {:<14}{:>6}  {:>6}% of {}",
            c.class, c.count, c.percent, s.percent_of
        )
        .unwrap();
    }
    out
}

pub fn pairs(p: &PairListing) -> String {
    let sign = match p.sign {
        Sign::Positive => "positive",
        Sign::Negative => "negative",
    };
    let mut out = format!("{} {sign} interactions: {}\n", p.method, p.count);
    for x in &p.pairs {
        let scope = if x.intra_goal { "intra" } else { "inter" };
        writeln!(out, "{}-{}\t{}\t{scope}", x.a, x.b, value(&Some(x.value))).unwrap();
    }
    out
}

pub fn verdicts(v: &VerdictListing) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{}: {} beautiful, {} ugly, {} unevaluated",
        v.method, v.beautiful, v.ugly, v.unevaluated
    )
    .unwrap();
    let top = |r: &[sdg_core::report::Ranked]| {
        join(
            r.iter()
                .take(5)
                .map(|x| format!("{} ({})", x.target, x.count)),
        )
    };
    writeln!(out, "  ugliest: {}", top(&v.ugliness)).unwrap();
    writeln!(out, "  most beautiful: {}", top(&v.beauty)).unwrap();
    out
}

pub fn targets(t: &TargetsDocument) -> String {
    let mut out = verdicts(&t.expert);
    out.push_str(&verdicts(&t.indicator));
    out
}

pub fn synthesis(r: &SynthesisReport) -> String {
    let mut out = String::new();
    let n = &r.negative;
    writeln!(out, "negative answer").unwrap();
    writeln!(
        out,
        "  goals with negative intra-goal interactions in both: {}",
        join(&n.common_goals)
    )
    .unwrap();
    writeln!(
        out,
        "  focus targets: {}",
        join(n.focus_targets.iter().map(|f| f.target))
    )
    .unwrap();
    writeln!(
        out,
        "  common ugly (>= {} negatives): {}",
        r.multi_negative_min,
        join(n.common_ugly.iter().map(|u| u.target))
    )
    .unwrap();
    let p = &r.positive;
    writeln!(out, "positive answer").unwrap();
    writeln!(out, "  common positive pairs: {}", join(&p.common_pairs)).unwrap();
    writeln!(
        out,
        "  common beautiful: {}",
        join(p.common_beautiful.iter().map(|b| b.target))
    )
    .unwrap();
    writeln!(out, "  prioritize: {}", join(&p.prioritized_targets)).unwrap();
    for x in &p.excluded {
        writeln!(
            out,
            "  excluded {} (conflicts with {})",
            x.item,
            join(&x.conflicts_with)
        )
        .unwrap();
    }
    out
}

fn hue(h: Hue) -> &'static str {
    match h {
        Hue::Blue => "blue",
        Hue::Red => "red",
        Hue::Black => "black",
        Hue::Gray => "gray",
    }
}

pub fn graph(g: &GraphDocument) -> String {
    let mut out = format!("{} nodes, {} edges\n", g.nodes.len(), g.edges.len());
    for e in &g.edges {
        let shade = e.shade.map_or("-".to_string(), |s| s.to_string());
        writeln!(
            out,
            "{}-{}\t{}\t{shade}\t{}",
            e.a,
            e.b,
            hue(e.hue),
            value(&e.value)
        )
        .unwrap();
    }
    out
}

fn method_report(m: &MethodReport) -> String {
    let mut out = stats(&m.stats);
    out.push_str(&verdicts(&m.verdicts));
    let busiest = m
        .intra_goal
        .goals
        .iter()
        .max_by_key(|g| (g.negative_count, std::cmp::Reverse(g.goal)));
    if let Some(g) = busiest.filter(|g| g.negative_count > 0) {
        writeln!(
            out,
            "  most negative intra-goal interactions: SDG {} ({})",
            g.goal, g.negative_count
        )
        .unwrap();
    }
    out
}

pub fn bundle(b: &ReportBundle) -> String {
    let mut out = String::new();
    for m in &b.methods {
        out.push_str(&method_report(m));
    }
    if let Some(s) = &b.synthesis {
        out.push_str(&synthesis(s));
    }
    out
}
