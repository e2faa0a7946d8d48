//! DOT, GraphML and SVG renderings. Output is a pure function of the
//! input, so repeated exports are byte-identical.

use std::fmt::Write;

use crate::graph::SemanticNetwork;
use crate::lexicon::{Lexicon, Partition};
use crate::mdmc::CommunityNetwork;
use crate::mds::{Layout, OMEGA_DISPLAY_SCALE};

/// Petal colours in wheel order (joy, trust, fear, surprise, sadness,
/// disgust, anger, anticipation); reused cyclically for other wheels.
pub const PETAL_COLORS: [&str; 8] = [
    "#f2c500", "#7cb342", "#2e7d32", "#00a3b4", "#1e6fd9", "#8e44ad", "#d92b2b", "#f07f00",
];
pub const SECONDARY_COLOR: &str = "#9e9e9e";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Weighted digraph without self-loops. Edges of weight 0 are omitted.
pub fn network_dot(net: &SemanticNetwork, communities: Option<&Partition>) -> String {
    let mut out = String::from("digraph semantic_network {\n");
    for (i, w) in net.words().iter().enumerate() {
        let _ = write!(out, "  n{i} [label={}", dot_id(w));
        if let Some(c) = communities.and_then(|p| p.label(i)) {
            let _ = write!(out, ", community={c}");
        }
        out.push_str("];\n");
    }
    for i in 0..net.len() {
        for j in (0..net.len()).filter(|&j| j != i) {
            let w = net.weight(i, j);
            if w > 0.0 {
                let _ = writeln!(out, "  n{i} -> n{j} [weight={w}];");
            }
        }
    }
    out.push_str("}\n");
    out
}

pub fn network_graphml(net: &SemanticNetwork, communities: Option<&Partition>) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n  \
         <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n  \
         <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n  \
         <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n  \
         <graph id=\"semantic_network\" edgedefault=\"directed\">\n",
    );
    for (i, w) in net.words().iter().enumerate() {
        let _ = write!(out, "    <node id=\"n{i}\"><data key=\"label\">{}</data>", escape(w));
        if let Some(c) = communities.and_then(|p| p.label(i)) {
            let _ = write!(out, "<data key=\"community\">{c}</data>");
        }
        out.push_str("</node>\n");
    }
    for i in 0..net.len() {
        for j in (0..net.len()).filter(|&j| j != i) {
            let w = net.weight(i, j);
            if w > 0.0 {
                let _ = writeln!(
                    out,
                    "    <edge source=\"n{i}\" target=\"n{j}\"><data key=\"weight\">{w}</data></edge>"
                );
            }
        }
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

/// Community digraph with Ω scaled by 10000; an edge `a -> b` carries the
/// strength of the connection from community a to community b.
pub fn omega_dot(cn: &CommunityNetwork) -> String {
    let mut out = String::from("digraph community_network {\n");
    for (a, k) in cn.communities.iter().enumerate() {
        let _ = writeln!(
            out,
            "  c{k} [label={}];",
            dot_id(&cn.labels[a].join(" / "))
        );
    }
    for (from, kf) in cn.communities.iter().enumerate() {
        for (to, kt) in cn.communities.iter().enumerate() {
            let w = cn.omega[(to, from)] * OMEGA_DISPLAY_SCALE;
            let _ = writeln!(out, "  c{kf} -> c{kt} [weight={w}];");
        }
    }
    out.push_str("}\n");
    out
}

/// Colour of each word: its petal colour, grey for words outside petals.
pub fn word_colors(lexicon: &Lexicon) -> Vec<String> {
    let wheel = lexicon.wheel();
    (0..lexicon.len())
        .map(|w| match wheel.petal_of(w) {
            Some(k) => PETAL_COLORS[k % PETAL_COLORS.len()].to_string(),
            None => SECONDARY_COLOR.to_string(),
        })
        .collect()
}

/// Scatter plot of the first two layout coordinates, one circle per point.
pub fn layout_svg(layout: &Layout, labels: &[String], colors: &[String]) -> String {
    const SIZE: f64 = 640.0;
    const MARGIN: f64 = 60.0;
    let n = layout.coords.rows();
    let coord = |i: usize, c: usize| {
        if c < layout.coords.cols() {
            layout.coords[(i, c)]
        } else {
            0.0
        }
    };
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for i in 0..n {
        for c in 0..2 {
            lo[c] = lo[c].min(coord(i, c));
            hi[c] = hi[c].max(coord(i, c));
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let scale = if span > 0.0 { (SIZE - 2.0 * MARGIN) / span } else { 0.0 };
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for i in 0..n {
        let x = MARGIN + (coord(i, 0) - lo[0]) * scale;
        // SVG y grows downward
        let y = SIZE - MARGIN - (coord(i, 1) - lo[1]) * scale;
        let color = colors.get(i).map_or(SECONDARY_COLOR, String::as_str);
        let label = labels.get(i).map_or("", String::as_str);
        let _ = writeln!(
            out,
            "<g class=\"node\"><circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"6\" fill=\"{color}\"/>\
             <text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\" font-family=\"sans-serif\">{}</text></g>",
            x + 8.0,
            y + 4.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn dot_skips_zero_edges_and_self_loops() {
        let w = Matrix::from_rows(&[vec![5.0, 2.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 3.5, 0.0]]).unwrap();
        let net = SemanticNetwork::unlabeled(w, 7.0).unwrap();
        let dot = network_dot(&net, None);
        assert_eq!(dot.matches(" -> ").count(), 3);
        assert!(dot.contains("n2 -> n1 [weight=3.5]"));
        let gml = network_graphml(&net, Some(&Partition::from_labels(&[0, 0, 1])));
        assert_eq!(gml.matches("<edge ").count(), 3);
        assert_eq!(gml.matches("key=\"community\">").count(), 3);
    }

    #[test]
    fn omega_is_scaled_on_export() {
        let cn = CommunityNetwork {
            communities: vec![1, 4],
            omega: Matrix::from_rows(&[vec![0.25, 0.0002], vec![0.0001, 0.5]]).unwrap(),
            labels: vec![vec!["joy".into(), "ecstasy".into()], vec!["fear".into()]],
        };
        let dot = omega_dot(&cn);
        assert!(dot.contains("c4 -> c1 [weight=2]"), "{dot}");
        assert!(dot.contains("c1 -> c4 [weight=1]"), "{dot}");
        assert!(dot.contains("label=\"joy / ecstasy\""));
    }

    #[test]
    fn svg_has_one_glyph_per_point() {
        let layout = Layout {
            coords: Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap(),
            eigenvalues: vec![1.0, 1.0],
            stress_note: 1.0,
        };
        let labels = vec!["a&b".to_string(), "c".into(), "d".into()];
        let svg = layout_svg(&layout, &labels, &[]);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("a&amp;b"));
    }
}
