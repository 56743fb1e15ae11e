mod common;

use common::*;

use cpcf_cli::prompt::PromptKind;
use cpcf_cli::score::{
    check_design, read_log, report, round2, score, tally, write_log, Answer, Reading, ScoreError,
    PUBLISHED_DESIGN,
};

fn chatbots(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("bot{i}")).collect()
}

#[test]
fn rounding_is_half_up_on_decimal_ties() {
    assert_eq!(round2(62.345), 62.35);
    assert_eq!(round2(0.125), 0.13);
    assert_eq!(round2(60.194_999), 60.19);
    assert_eq!(round2(100.0), 100.0);
}

#[test]
fn truthful_answers_score_one_hundred_percent() {
    let algos = algorithms(3);
    let truth = truth_for(&algos);
    let log = synthetic_log(&truth, &chatbots(2), 2, &|_, _, _, _, v| truthful(v));
    let (r, design) = score(&log, &truth).unwrap();
    for t in [&r.correct_class, &r.multi_class, &r.perturbations] {
        for row in &t.rows {
            assert!(row.cells.iter().all(|c| *c == Some(100.0)), "{row:?}");
            assert_eq!(row.average, Some(100.0));
        }
    }
    assert!(design.complete(), "{design:?}");
    assert_eq!(design.reading, Reading::ReferenceExcluded);
}

#[test]
fn inverted_answers_score_zero() {
    let truth = truth_for(&algorithms(2));
    let log = synthetic_log(
        &truth,
        &chatbots(1),
        1,
        &|_, _, _, _, v| match truthful(v) {
            Answer::Yes => Answer::No,
            Answer::No => Answer::Yes,
        },
    );
    let (r, _) = score(&log, &truth).unwrap();
    assert!(r
        .correct_class
        .rows
        .iter()
        .all(|row| row.average == Some(0.0)));
}

#[test]
fn first_row_average_of_the_correct_class_table() {
    let p = published();
    let r = report(&published_tally(&p));
    let row = r.correct_class.row("P1").unwrap();
    assert_eq!(row.average, Some(62.34));
    // Independently: the mean of the seven cells, rounded half up.
    let cells = &p.correct_class.row("P1").cells;
    let mean = cells.iter().sum::<f64>() / cells.len() as f64;
    assert!((mean - 62.335_714).abs() < 1e-5);
}

#[test]
fn correct_class_table_matches_within_a_hundredth() {
    let p = published();
    let r = report(&published_tally(&p));
    let cols = &r.correct_class.columns;
    for want in &p.correct_class.rows {
        let got = r.correct_class.row(&want.label).unwrap();
        for (j, chatbot) in p.chatbots.iter().enumerate() {
            let i = cols.iter().position(|c| c == chatbot).unwrap();
            assert_eq!(
                got.cells[i],
                Some(want.cells[j]),
                "{} {chatbot}",
                want.label
            );
        }
        assert!((got.average.unwrap() - want.average).abs() <= 0.01 + 1e-9);
    }
    let footer = r.correct_class.footer.as_ref().unwrap();
    for (j, chatbot) in p.chatbots.iter().enumerate() {
        let i = cols.iter().position(|c| c == chatbot).unwrap();
        let got = footer.cells[i].unwrap();
        assert!(
            (got - p.correct_class.footer[j]).abs() <= 0.01 + 1e-9,
            "{chatbot}: {got} vs {}",
            p.correct_class.footer[j]
        );
    }
}

/// Pooled overall accuracy computed straight from the two class cells.
fn weighted_overall(correct: f64, incorrect: f64) -> f64 {
    (3.0 * correct + 4.0 * incorrect) / 7.0
}

#[test]
fn overall_rows_are_the_three_to_four_weighted_class_accuracies() {
    let p = published();
    let r = report(&published_tally(&p));
    let cols = &r.multi_class.columns;
    let mut mismatches = Vec::new();
    for k in ["P3", "P4"] {
        let c = &p.multi_class.row(&format!("{k} / Correct")).cells;
        let n = &p.multi_class.row(&format!("{k} / Incorrect")).cells;
        let published = p.multi_class.row(&format!("{k} / Overall"));
        let got = r.multi_class.row(&format!("{k} / Overall")).unwrap();
        for (j, chatbot) in p.chatbots.iter().enumerate() {
            let i = cols.iter().position(|x| x == chatbot).unwrap();
            let cell = got.cells[i].unwrap();
            assert_eq!(cell, round2(weighted_overall(c[j], n[j])));
            if (cell - published.cells[j]).abs() > 0.01 + 1e-9 {
                mismatches.push((k, chatbot.as_str(), published.cells[j], cell));
            }
        }
    }
    // One published cell disagrees with its own class rows.
    assert_eq!(mismatches, [("P3", "claude", 76.19, 84.42)]);
}

#[test]
fn deepseek_overall_uses_pooled_counts_not_equal_weights() {
    let p = published();
    let r = report(&published_tally(&p));
    let i = r
        .multi_class
        .columns
        .iter()
        .position(|c| c == "deepseek")
        .unwrap();
    let got = r.multi_class.row("P3 / Overall").unwrap().cells[i].unwrap();
    assert_eq!(got, 87.53);
    assert_ne!(round2((76.97 + 95.45) / 2.0), got);
}

#[test]
fn published_design_counts() {
    assert_eq!(PUBLISHED_DESIGN.responses(), 3080);
    assert_eq!(
        PUBLISHED_DESIGN.answers(Reading::ReferenceExcluded),
        Some((4620, 10780))
    );
    assert_eq!(
        PUBLISHED_DESIGN.answers(Reading::ReferenceIncluded),
        Some((6160, 12320))
    );

    let truth = truth_for(&algorithms(11));
    let log = synthetic_log(&truth, &chatbots(7), 10, &|_, _, _, _, v| truthful(v));
    let d = check_design(&log, &truth);
    assert_eq!(d.design, PUBLISHED_DESIGN);
    assert_eq!(d.responses, 3080);
    assert_eq!(d.expected_responses, 3080);
    assert_eq!(
        (d.single_class_answers, d.multi_class_answers),
        (4620, 10780)
    );
    assert_eq!(d.single_class_answers + d.multi_class_answers, 15400);
    assert_eq!(d.reading, Reading::ReferenceExcluded);
    assert!(d.complete());
}

#[test]
fn logs_answering_the_reference_are_recognized() {
    let truth = truth_for(&algorithms(2));
    let mut log = synthetic_log(&truth, &chatbots(1), 1, &|_, _, _, _, v| truthful(v));
    let mut refs: Vec<_> = log
        .iter()
        .filter(|r| r.variant == "cp")
        .map(|r| {
            let mut r = r.clone();
            r.variant = "ref".into();
            r.answer = Answer::Yes;
            r
        })
        .collect();
    log.append(&mut refs);
    assert_eq!(
        check_design(&log, &truth).reading,
        Reading::ReferenceIncluded
    );
}

#[test]
fn gaps_in_the_grid_are_reported() {
    let truth = truth_for(&algorithms(2));
    let log: Vec<_> = synthetic_log(&truth, &chatbots(2), 3, &|_, _, _, _, v| truthful(v))
        .into_iter()
        .filter(|r| !(r.algorithm == "algo02" && r.prompt == PromptKind::P2 && r.round == 2))
        .collect();
    let d = check_design(&log, &truth);
    assert!(!d.complete());
    assert_eq!(d.missing, ["algo02,P2,bot1,2", "algo02,P2,bot2,2"]);
}

#[test]
fn scoring_ignores_row_order() {
    let truth = truth_for(&algorithms(3));
    let log = synthetic_log(&truth, &chatbots(3), 2, &|a, k, c, round, v| {
        if (a.len() + k.name().len() * 3 + c.len() + round as usize + v.len()) % 3 == 0 {
            Answer::No
        } else {
            Answer::Yes
        }
    });
    let mut shuffled = log.clone();
    shuffled.reverse();
    shuffled.rotate_left(17);
    assert_eq!(
        tally(&log, &truth).unwrap(),
        tally(&shuffled, &truth).unwrap()
    );
}

#[test]
fn rows_without_ground_truth_are_rejected() {
    let truth = truth_for(&algorithms(1));
    let mut log = synthetic_log(&truth, &chatbots(1), 1, &|_, _, _, _, v| truthful(v));
    log[0].algorithm = "unknown".into();
    let mut extra = log[1].clone();
    extra.prompt = PromptKind::P1;
    extra.variant = "bug_cf".into();
    log.push(extra);
    match tally(&log, &truth) {
        Err(ScoreError::LogTruthMismatch(rows)) => assert_eq!(rows.len(), 2, "{rows:?}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn csv_round_trip() {
    let truth = truth_for(&algorithms(1));
    let log = synthetic_log(&truth, &chatbots(1), 1, &|_, _, _, _, v| truthful(v));
    let text = write_log(&log).unwrap();
    assert!(text.starts_with("algorithm,prompt,chatbot,round,variant,answer\n"));
    assert!(text.contains("algo01,P3,bot1,1,bug_cp,no\n"));
    assert_eq!(read_log(text.as_bytes()).unwrap(), log);
    assert!(read_log(
        "algorithm,prompt,chatbot,round,variant,answer\na,P9,c,1,cp,yes\n".as_bytes()
    )
    .is_err());
}
