//! Text renderings of dendrograms and ECDFs: Newick, Graphviz DOT and
//! standalone SVG.

use std::fmt::Write;

use sclop_core::dendrogram::Dendrogram;
use sclop_core::prototype::Ecdf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ExportFormat {
    Newick,
    Dot,
    Svg,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Newick => "nwk",
            ExportFormat::Dot => "dot",
            ExportFormat::Svg => "svg",
        }
    }
}

/// Newick tree; a branch length is the height difference between a node and
/// its parent, so leaf depths reproduce the merge heights.
pub fn newick(dend: &Dendrogram) -> String {
    fn node(dend: &Dendrogram, id: usize, parent_height: Option<f64>, out: &mut String) {
        match dend.children(id) {
            None => out.push_str(&dend.labels()[id].to_string()),
            Some((l, r)) => {
                let h = dend.height(id);
                out.push('(');
                node(dend, l, Some(h), out);
                out.push(',');
                node(dend, r, Some(h), out);
                out.push(')');
            }
        }
        if let Some(p) = parent_height {
            let _ = write!(out, ":{}", p - dend.height(id));
        }
    }
    let mut out = String::new();
    node(dend, dend.root(), None, &mut out);
    out.push_str(";\n");
    out
}

/// Graphviz digraph from the root down. Pruned cluster roots are drawn as
/// boxes.
pub fn dot(dend: &Dendrogram, clusters: &[usize]) -> String {
    let mut out = String::from("digraph dendrogram {\n  node [fontname=\"Helvetica\"];\n");
    for id in 0..dend.node_count() {
        let shape = if clusters.contains(&id) {
            "box"
        } else if dend.is_leaf(id) {
            "plaintext"
        } else {
            "ellipse"
        };
        let label = if dend.is_leaf(id) {
            dend.labels()[id].to_string()
        } else {
            format!("{:.4}", dend.height(id))
        };
        let _ = writeln!(out, "  n{id} [label=\"{label}\", shape={shape}];");
    }
    for (s, m) in dend.merges().iter().enumerate() {
        let parent = dend.leaf_count() + s;
        let _ = writeln!(out, "  n{parent} -> n{};\n  n{parent} -> n{};", m.left, m.right);
    }
    out.push_str("}\n");
    out
}

/// Well separated hues by golden-angle stepping, as `#rrggbb` (plain hex is
/// understood by every SVG renderer, `hsl()` is not).
fn color(i: usize) -> String {
    let h = (i as f64 * 137.508) % 360.0 / 60.0;
    let (s, l) = (0.65, 0.42);
    let c = (1.0 - (2.0 * l - 1.0_f64).abs()) * s;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

const GREY: &str = "#999999";

/// Leaves in drawing order (left subtree first).
fn leaf_order(dend: &Dendrogram) -> Vec<usize> {
    let mut order = Vec::with_capacity(dend.leaf_count());
    let mut stack = vec![dend.root()];
    while let Some(id) = stack.pop() {
        match dend.children(id) {
            Some((l, r)) => {
                stack.push(r);
                stack.push(l);
            }
            None => order.push(id),
        }
    }
    order
}

struct Panel<'a> {
    dend: &'a Dendrogram,
    x: Vec<f64>,
    max_height: f64,
    top: f64,
    plot_height: f64,
}

impl Panel<'_> {
    fn y(&self, node: usize) -> f64 {
        self.top + self.plot_height * (1.0 - self.dend.height(node) / self.max_height)
    }

    /// Draws every link and leaf label. `link_color(node)` colors the
    /// vertical segment above `node` and, for inner nodes, its crossbar.
    fn draw(
        &self,
        out: &mut String,
        offset: f64,
        title: &str,
        link_color: &dyn Fn(usize) -> String,
        leaf_color: &dyn Fn(usize) -> String,
    ) {
        let _ = writeln!(out, "<g transform=\"translate({offset:.1},0)\">");
        let _ = writeln!(out, "<text x=\"10\" y=\"20\" font-size=\"14\">{title}</text>");
        let n = self.dend.leaf_count();
        for (s, m) in self.dend.merges().iter().enumerate() {
            let p = n + s;
            let yp = self.y(p);
            let _ = writeln!(
                out,
                "<path d=\"M{:.1},{yp:.1}H{:.1}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"/>",
                self.x[m.left],
                self.x[m.right],
                link_color(p)
            );
            // each child's vertical drop carries the child's color
            for child in [m.left, m.right] {
                let _ = writeln!(
                    out,
                    "<path d=\"M{:.1},{:.1}V{yp:.1}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"/>",
                    self.x[child],
                    self.y(child),
                    link_color(child)
                );
            }
        }
        let base = self.top + self.plot_height + 6.0;
        for leaf in 0..n {
            let _ = writeln!(
                out,
                "<text x=\"{x:.1}\" y=\"{base:.1}\" font-size=\"9\" fill=\"{}\" text-anchor=\"end\" transform=\"rotate(-90 {x:.1} {base:.1})\">{}</text>",
                leaf_color(leaf),
                self.dend.labels()[leaf],
                x = self.x[leaf]
            );
        }
        out.push_str("</g>\n");
    }
}

/// Two panels side by side: links and labels colored by run on the left,
/// by pruned cluster on the right.
pub fn svg_dendrogram(dend: &Dendrogram, runs: usize, clusters: &[usize]) -> String {
    let n = dend.leaf_count();
    let step = 12.0;
    let margin = 20.0;
    let panel_width = (n as f64 * step + 2.0 * margin).max(320.0);
    let (top, plot_height, label_space) = (40.0, 320.0, 50.0);

    let mut x = vec![0.0; dend.node_count()];
    for (pos, &leaf) in leaf_order(dend).iter().enumerate() {
        x[leaf] = margin + step * (pos as f64 + 0.5);
    }
    for (s, m) in dend.merges().iter().enumerate() {
        x[n + s] = (x[m.left] + x[m.right]) / 2.0;
    }
    let max_height = dend.height(dend.root()).max(f64::MIN_POSITIVE);
    let panel = Panel {
        dend,
        x,
        max_height,
        top,
        plot_height,
    };

    // run of a node if all its leaves come from one run
    let mut single_run: Vec<Option<usize>> = dend.labels().iter().map(|l| Some(l.run)).collect();
    for m in dend.merges() {
        let (a, b) = (single_run[m.left], single_run[m.right]);
        single_run.push(if a == b { a } else { None });
    }
    let mut cluster_of = vec![None; dend.node_count()];
    for (c, &root) in clusters.iter().enumerate() {
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            cluster_of[id] = Some(c);
            if let Some((l, r)) = dend.children(id) {
                stack.extend([l, r]);
            }
        }
    }

    let width = 2.0 * panel_width;
    let height = top + plot_height + label_space;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let by_run = |node: usize| single_run[node].map_or(GREY.to_string(), color);
    let leaf_run = |leaf: usize| color(dend.labels()[leaf].run);
    panel.draw(
        &mut out,
        0.0,
        &format!("colored by run (R = {runs})"),
        &by_run,
        &leaf_run,
    );
    let by_cluster = |node: usize| cluster_of[node].map_or(GREY.to_string(), color);
    panel.draw(
        &mut out,
        panel_width,
        &format!("colored by cluster ({} clusters)", clusters.len()),
        &by_cluster,
        &by_cluster,
    );
    out.push_str("</svg>\n");
    out
}

/// Step plot of several ECDFs over a shared axis.
pub fn svg_ecdf(series: &[(String, Ecdf)]) -> String {
    let (width, height, margin) = (640.0, 420.0, 50.0);
    let all = series.iter().flat_map(|(_, e)| e.samples().iter().copied());
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-3);
    let (lo, hi) = (lo - pad, hi + pad);
    let px = |v: f64| margin + (width - 2.0 * margin) * (v - lo) / (hi - lo);
    let py = |p: f64| height - margin - (height - 2.0 * margin) * p;

    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <path d=\"M{m},{b}H{r}M{m},{b}V{m}\" stroke=\"black\" fill=\"none\"/>\n",
        m = margin,
        b = height - margin,
        r = width - margin
    );
    for i in 0..=4 {
        let p = i as f64 / 4.0;
        let v = lo + (hi - lo) * p;
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\">{v:.3}</text>",
            px(v),
            height - margin + 15.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"end\">{p:.2}</text>",
            margin - 5.0,
            py(p) + 3.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">mean similarity</text>",
        width / 2.0,
        height - 10.0
    );
    for (i, (name, ecdf)) in series.iter().enumerate() {
        let c = color(i);
        let mut d = format!("M{:.1},{:.1}", px(lo), py(0.0));
        for (v, p) in ecdf.steps() {
            let _ = write!(d, "H{:.1}V{:.1}", px(v), py(p));
        }
        let _ = write!(d, "H{:.1}", px(hi));
        let _ = writeln!(
            out,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{c}\" stroke-width=\"1.5\"/>"
        );
        let ly = margin + 14.0 * i as f64;
        let _ = writeln!(
            out,
            "<path d=\"M{:.1},{ly:.1}h18\" stroke=\"{c}\" stroke-width=\"2\"/><text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\">{name}</text>",
            margin + 10.0,
            margin + 32.0,
            ly + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use sclop_core::dendrogram::{complete_linkage, DistanceMatrix};
    use sclop_core::similarity::TopicLabel;

    fn three() -> Dendrogram {
        let d = DistanceMatrix::from_square(3, vec![0.0, 0.1, 0.9, 0.1, 0.0, 0.9, 0.9, 0.9, 0.0]).unwrap();
        let labels = vec![
            TopicLabel { run: 0, topic: 0 },
            TopicLabel { run: 1, topic: 0 },
            TopicLabel { run: 1, topic: 1 },
        ];
        complete_linkage(&d, labels).unwrap()
    }

    #[test]
    fn newick_branch_lengths_are_height_differences() {
        assert_eq!(newick(&three()), "(2.2:0.9,(1.1:0.1,2.1:0.1):0.8);\n");
    }

    #[test]
    fn dot_lists_every_node_and_edge() {
        let s = dot(&three(), &[3, 2]);
        assert_eq!(s.matches("->").count(), 4);
        assert!(s.contains("n3 [label=\"0.1000\", shape=box]"));
        assert!(s.contains("n2 [label=\"2.2\", shape=box]"));
    }

    #[test]
    fn svg_has_one_path_per_merge_and_panel() {
        let s = svg_dendrogram(&three(), 2, &[3, 2]);
        // crossbar plus two drops per merge, two panels
        assert_eq!(s.matches("<path").count(), 12);
        assert!(!s.contains("hsl("));
        assert_eq!(s.matches(">2.2</text>").count(), 2);
    }

    #[test]
    fn palette_starts_with_distinct_hex_colors() {
        let c: Vec<String> = (0..8).map(color).collect();
        // reference values from colorsys.hls_to_rgb
        assert_eq!(&c[..3], ["#b12525", "#25b14e", "#7725b1"]);
        assert!(c.iter().all(|x| x.len() == 7 && x.starts_with('#')));
        let unique: std::collections::BTreeSet<_> = c.iter().collect();
        assert_eq!(unique.len(), 8);
    }

    #[test]
    fn ecdf_plot_has_a_curve_per_series() {
        let e = Ecdf::new(&[0.8, 0.9, 0.85]).unwrap();
        let s = svg_ecdf(&[("raw".into(), e.clone()), ("size 5".into(), e)]);
        assert_eq!(s.matches("stroke-width=\"1.5\"").count(), 2);
        assert!(s.contains(">size 5</text>"));
    }
}
