use proptest::prelude::*;
use rankmatch::elicitation::{
    decode_mpl, encode_mpl, loss_schedule, read_responses, resolve_lottery_payment, resolve_mpl_payment,
    write_responses, LotteryResponse, LotteryTask, MplPayment, MplResponse, ResponseRow, ROWS,
};
use rankmatch::Cents;

fn mpl(a: u8, b: u8) -> MplResponse {
    MplResponse::new(a, b).unwrap()
}

#[test]
fn decode_round_trips_and_is_increasing() {
    for a in 1..=ROWS {
        for b in 1..=ROWS {
            let v = decode_mpl(mpl(a, b));
            assert_eq!(encode_mpl(v).unwrap(), mpl(a, b));
            if b < ROWS {
                assert!(decode_mpl(mpl(a, b + 1)) > v);
            }
            if a < ROWS {
                assert!(decode_mpl(mpl(a + 1, b)) > v);
            }
        }
    }
    assert_eq!(encode_mpl(Cents::ZERO).unwrap(), MplResponse::NEVER_KEEP);
}

#[test]
fn out_of_range_rows_are_rejected() {
    assert!(MplResponse::new(0, 3).is_err());
    assert!(MplResponse::new(51, 1).is_err());
    assert!(MplResponse::new(4, 0).is_err());
    assert!(LotteryResponse::new(LotteryTask::HoltLaury, 0).is_err());
    assert!(resolve_mpl_payment(mpl(4, 4), 0, 1).is_err());
    assert!(resolve_lottery_payment(LotteryResponse::new(LotteryTask::HoltLaury, 3).unwrap(), 4, 1.0).is_err());
}

/// Money offered at the drawn row.
fn implied_money(resp: MplResponse, d1: u8, d2: u8) -> Cents {
    if d1 == resp.screen1_row() {
        Cents(100 * d1 as i64 + 2 * d2 as i64)
    } else {
        Cents::from_dollars(d1 as i64)
    }
}

proptest! {
    #[test]
    fn payment_is_consistent_with_decoded_value(a in 1u8..=50, b in 1u8..=50, d1 in 1u8..=50, d2 in 1u8..=50) {
        let resp = mpl(a, b);
        let value = decode_mpl(resp);
        let money = implied_money(resp, d1, d2);
        let paid = resolve_mpl_payment(resp, d1, d2).unwrap();
        if money > value {
            prop_assert_eq!(paid, MplPayment::Money(money));
        } else if money < value {
            prop_assert_eq!(paid, MplPayment::KeepObject);
        }
    }

    #[test]
    fn lottery_payment_takes_one_of_the_option_outcomes(row in 1u8..=50, draw in 1u8..=50, coin in 0.0f64..1.0) {
        let hl = resolve_lottery_payment(LotteryResponse::new(LotteryTask::HoltLaury, row).unwrap(), draw, coin).unwrap();
        let options = if draw <= row { [Cents(2400), Cents(2000)] } else { [Cents(3800), Cents(1200)] };
        prop_assert!(options.contains(&hl));
        let la = resolve_lottery_payment(LotteryResponse::new(LotteryTask::LossAversion, row).unwrap(), draw, coin).unwrap();
        let options = if draw <= row { [Cents(3000), Cents(2000)] } else { [Cents(3000) - loss_schedule(draw), Cents(3000)] };
        prop_assert!(options.contains(&la));
    }
}

#[test]
fn never_keep_sells_at_every_price() {
    for d1 in 1..=ROWS {
        for d2 in 1..=ROWS {
            assert_eq!(
                resolve_mpl_payment(MplResponse::NEVER_KEEP, d1, d2).unwrap(),
                MplPayment::Money(Cents::from_dollars(d1 as i64))
            );
        }
    }
}

#[test]
fn loss_schedule_endpoints() {
    assert_eq!(loss_schedule(1), Cents(2000));
    assert_eq!(loss_schedule(50), Cents(40));
}

#[test]
fn responses_file_errors_name_the_row() {
    let text = "subject_id,task_id,screen1_row,screen2_row,switch_row\n\
                s1,mug,12,4,\n\
                s1,holt_laury,,,\n";
    let err = read_responses(text.as_bytes(), "r.csv").unwrap_err().to_string();
    assert!(err.contains("r.csv") && err.contains('3'), "{err}");
}

#[test]
fn responses_file_round_trip() {
    let rows = vec![
        ResponseRow {
            subject_id: "s1".into(),
            task_id: "pens".into(),
            screen1_row: Some(7),
            screen2_row: Some(33),
            switch_row: None,
        },
        ResponseRow {
            subject_id: "s1".into(),
            task_id: "loss_aversion".into(),
            screen1_row: None,
            screen2_row: None,
            switch_row: Some(20),
        },
    ];
    let mut buf = Vec::new();
    write_responses(&mut buf, &rows).unwrap();
    let back: Vec<ResponseRow> = read_responses(buf.as_slice(), "mem").unwrap().into_iter().map(|(r, _)| r).collect();
    assert_eq!(back, rows);
}
