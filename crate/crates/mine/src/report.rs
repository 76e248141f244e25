use crate::sessions::LinkStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    #[value(alias = "text-bars")]
    Text,
}

pub const BAR_WIDTH: usize = 40;

pub fn report(stats: &[LinkStats], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(stats).expect("stats serialize") + "\n",
        Format::Csv => csv_report(stats),
        Format::Text => text_bars(stats),
    }
}

fn csv_report(stats: &[LinkStats]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["link", "challenges", "sessions", "all", "some", "none"])
        .expect("in-memory write");
    for s in stats {
        w.write_record([
            s.link.clone(),
            s.challenge_count.to_string(),
            s.session_count.to_string(),
            s.all_solved.to_string(),
            s.some_solved.to_string(),
            s.none_solved.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// One cumulative bar per link, scaled to the largest session count:
/// `#` all solved, `+` some, `.` none.
fn text_bars(stats: &[LinkStats]) -> String {
    let max = stats.iter().map(|s| s.session_count).max().unwrap_or(0).max(1);
    let label_w = stats
        .iter()
        .map(|s| s.link.len() + s.challenge_count.to_string().len() + 3)
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for s in stats {
        let scale = |n: usize| (n * BAR_WIDTH + max / 2) / max;
        // Cumulative ends keep rounding from growing the bar past its total.
        let all_end = scale(s.all_solved);
        let some_end = scale(s.all_solved + s.some_solved);
        let none_end = scale(s.session_count);
        let bar: String = "#".repeat(all_end) + &"+".repeat(some_end - all_end) + &".".repeat(none_end - some_end);
        let label = format!("{} ({})", s.link, s.challenge_count);
        out.push_str(&format!(
            "{label:<label_w$} |{bar:<BAR_WIDTH$}| {} sessions: {} all, {} some, {} none\n",
            s.session_count, s.all_solved, s.some_solved, s.none_solved
        ));
    }
    out.push_str("legend: # all solved, + some solved, . none solved\n");
    out
}
