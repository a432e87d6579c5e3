//! Two-screen multiple price list (MPL) and the lottery tasks' payment rules.
//!
//! Screen 1 offers the object against `$1 .. $50` in dollar steps; the
//! selected row is the last one at which the subject keeps the object.
//! Screen 2 refines within `(row1, row1 + 1]` in 2-cent steps: row `k`
//! offers `row1 + 0.02 k`. A subject who would sell even at `$1` is stored as
//! the sentinel `(0, 0)` and decodes to `$0.00`.

use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::Cents;

pub const ROWS: u8 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MplResponse {
    screen1_row: u8,
    screen2_row: u8,
}

impl MplResponse {
    /// Sells at every price.
    pub const NEVER_KEEP: MplResponse = MplResponse {
        screen1_row: 0,
        screen2_row: 0,
    };

    pub fn new(screen1_row: u8, screen2_row: u8) -> Result<Self> {
        if (screen1_row, screen2_row) == (0, 0) {
            return Ok(Self::NEVER_KEEP);
        }
        for (name, row) in [("screen1_row", screen1_row), ("screen2_row", screen2_row)] {
            if !(1..=ROWS).contains(&row) {
                return Err(Error::argument(format!("{name} = {row} outside 1..={ROWS}")));
            }
        }
        Ok(MplResponse {
            screen1_row,
            screen2_row,
        })
    }

    pub fn screen1_row(self) -> u8 {
        self.screen1_row
    }

    pub fn screen2_row(self) -> u8 {
        self.screen2_row
    }
}

/// Value implied by an MPL response.
pub fn decode_mpl(resp: MplResponse) -> Cents {
    if resp == MplResponse::NEVER_KEEP {
        return Cents::ZERO;
    }
    Cents(100 * resp.screen1_row as i64 + 2 * resp.screen2_row as i64)
}

/// Inverse of [`decode_mpl`]. Representable values are `$0` and the even
/// cent amounts in `$1.02 ..= $51.00`.
pub fn encode_mpl(value: Cents) -> Result<MplResponse> {
    let v = value.0;
    if v == 0 {
        return Ok(MplResponse::NEVER_KEEP);
    }
    if !(102..=5100).contains(&v) || v % 2 != 0 {
        return Err(Error::argument(format!("{value} is not on the price list grid")));
    }
    let r1 = (v - 2) / 100;
    MplResponse::new(r1 as u8, ((v - 100 * r1) / 2) as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "amount")]
pub enum MplPayment {
    KeepObject,
    Money(Cents),
}

fn check_draw(name: &str, draw: u8) -> Result<()> {
    if !(1..=ROWS).contains(&draw) {
        return Err(Error::argument(format!("{name} = {draw} outside 1..={ROWS}")));
    }
    Ok(())
}

/// Pays the row picked by `draw1` on screen 1, or by `draw2` on screen 2 when
/// `draw1` hits the selected screen-1 row.
pub fn resolve_mpl_payment(resp: MplResponse, draw1: u8, draw2: u8) -> Result<MplPayment> {
    check_draw("draw1", draw1)?;
    check_draw("draw2", draw2)?;
    let row1 = resp.screen1_row;
    Ok(if draw1 < row1 {
        MplPayment::KeepObject
    } else if draw1 > row1 {
        MplPayment::Money(Cents::from_dollars(draw1 as i64))
    } else if draw2 <= resp.screen2_row {
        MplPayment::KeepObject
    } else {
        MplPayment::Money(Cents(100 * row1 as i64 + 2 * draw2 as i64))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LotteryTask {
    HoltLaury,
    LossAversion,
}

impl FromStr for LotteryTask {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "holt_laury" => Ok(LotteryTask::HoltLaury),
            "loss_aversion" => Ok(LotteryTask::LossAversion),
            other => Err(Error::argument(format!("unknown lottery task {other:?}"))),
        }
    }
}

/// `switch_row` is the last row at which option A is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LotteryResponse {
    pub task: LotteryTask,
    switch_row: u8,
}

impl LotteryResponse {
    pub fn new(task: LotteryTask, switch_row: u8) -> Result<Self> {
        check_draw("switch_row", switch_row)?;
        Ok(LotteryResponse { task, switch_row })
    }

    pub fn switch_row(self) -> u8 {
        self.switch_row
    }
}

pub const HL_A: (Cents, Cents) = (Cents(2400), Cents(2000));
pub const HL_B: (Cents, Cents) = (Cents(3800), Cents(1200));
pub const LA_A_BASE: Cents = Cents(2000);
pub const LA_A_BONUS: Cents = Cents(1000);
pub const LA_B_BASE: Cents = Cents(3000);

/// Loss of option B at `row`: `$20.00` at row 1 falling by `$0.40` per row.
pub fn loss_schedule(row: u8) -> Cents {
    Cents(2000 - 40 * (row as i64 - 1))
}

/// Pays the task row picked by `draw`. `coin` is a uniform draw on `[0, 1)`.
/// Holt-Laury row `k` pays the high outcome with probability `k / 50`; the
/// loss-aversion options realize their bonus or loss when `coin < 0.5`.
pub fn resolve_lottery_payment(resp: LotteryResponse, draw: u8, coin: f64) -> Result<Cents> {
    check_draw("draw", draw)?;
    if !(0.0..1.0).contains(&coin) {
        return Err(Error::argument(format!("coin = {coin} outside [0, 1)")));
    }
    let option_a = draw <= resp.switch_row;
    Ok(match resp.task {
        LotteryTask::HoltLaury => {
            let (high, low) = if option_a { HL_A } else { HL_B };
            if coin < draw as f64 / ROWS as f64 {
                high
            } else {
                low
            }
        }
        LotteryTask::LossAversion => {
            let heads = coin < 0.5;
            match (option_a, heads) {
                (true, true) => LA_A_BASE + LA_A_BONUS,
                (true, false) => LA_A_BASE,
                (false, true) => LA_B_BASE - loss_schedule(draw),
                (false, false) => LA_B_BASE,
            }
        }
    })
}

/// One row of a raw responses file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRow {
    pub subject_id: String,
    pub task_id: String,
    pub screen1_row: Option<u8>,
    pub screen2_row: Option<u8>,
    pub switch_row: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskResponse {
    Mpl(MplResponse),
    Lottery(LotteryResponse),
}

impl ResponseRow {
    /// Tasks `holt_laury` and `loss_aversion` are lotteries; any other task id
    /// is an MPL.
    pub fn parse(&self) -> Result<TaskResponse> {
        match self.task_id.parse::<LotteryTask>() {
            Ok(task) => {
                let row = self
                    .switch_row
                    .ok_or_else(|| Error::argument("lottery task without switch_row"))?;
                Ok(TaskResponse::Lottery(LotteryResponse::new(task, row)?))
            }
            Err(_) => match (self.screen1_row, self.screen2_row) {
                (Some(a), Some(b)) => Ok(TaskResponse::Mpl(MplResponse::new(a, b)?)),
                _ => Err(Error::argument("MPL task needs screen1_row and screen2_row")),
            },
        }
    }
}

pub const RESPONSE_HEADER: [&str; 5] =
    ["subject_id", "task_id", "screen1_row", "screen2_row", "switch_row"];

/// Reads and validates a responses CSV. Row numbers in errors count the
/// header as row 1.
pub fn read_responses<R: Read>(reader: R, file: &str) -> Result<Vec<(ResponseRow, TaskResponse)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != RESPONSE_HEADER {
        return Err(Error::data(
            file,
            1,
            format!("header must be {}", RESPONSE_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<ResponseRow>().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::data(file, row, e.to_string()))?;
        let parsed = rec.parse().map_err(|e| Error::data(file, row, e.to_string()))?;
        out.push((rec, parsed));
    }
    Ok(out)
}

pub fn write_responses<W: Write>(writer: W, rows: &[ResponseRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<responses>", e))?;
    Ok(())
}
