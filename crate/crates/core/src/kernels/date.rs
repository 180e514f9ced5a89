//! ISO-8601 calendar dates (`YYYY-MM-DD`, proleptic Gregorian, no time zone).

use serde::{Deserialize, Serialize};

use crate::error::{ErrorKind, OpError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DatePart {
    Year,
    Month,
    DayOfMonth,
    /// ISO weekday, Monday = 1 through Sunday = 7.
    Weekday,
    DayOfYear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CivilDate {
    pub year: i32,
    pub month: u32,
    pub day: u32,
}

fn is_leap(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        2 => 28,
        _ => 0,
    }
}

fn parse_error(s: &str) -> OpError {
    OpError::new(ErrorKind::DateParse, format!("invalid date {s:?}, expected YYYY-MM-DD"))
}

fn digits(s: &str) -> Option<u32> {
    if s.bytes().all(|b| b.is_ascii_digit()) {
        s.parse().ok()
    } else {
        None
    }
}

impl CivilDate {
    pub fn parse(s: &str) -> Result<CivilDate, OpError> {
        let b = s.as_bytes();
        if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
            return Err(parse_error(s));
        }
        let year = digits(&s[0..4]).ok_or_else(|| parse_error(s))? as i32;
        let month = digits(&s[5..7]).ok_or_else(|| parse_error(s))?;
        let day = digits(&s[8..10]).ok_or_else(|| parse_error(s))?;
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
            return Err(parse_error(s));
        }
        Ok(CivilDate { year, month, day })
    }

    /// Days since 1970-01-01.
    pub fn days_since_epoch(self) -> i64 {
        // Shift the year so it starts in March; leap days fall at year end.
        let y = i64::from(self.year) - i64::from(self.month <= 2);
        let m = i64::from(self.month);
        let d = i64::from(self.day);
        let era = y.div_euclid(400);
        let yoe = y - era * 400;
        let mp = (m + 9) % 12;
        let doy = (153 * mp + 2) / 5 + d - 1;
        let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        era * 146_097 + doe - 719_468
    }

    pub fn weekday(self) -> u32 {
        // 1970-01-01 was a Thursday.
        (self.days_since_epoch() + 3).rem_euclid(7) as u32 + 1
    }

    pub fn day_of_year(self) -> u32 {
        (1..self.month)
            .map(|m| days_in_month(self.year, m))
            .sum::<u32>()
            + self.day
    }

    pub fn part(self, part: DatePart) -> i64 {
        match part {
            DatePart::Year => i64::from(self.year),
            DatePart::Month => i64::from(self.month),
            DatePart::DayOfMonth => i64::from(self.day),
            DatePart::Weekday => i64::from(self.weekday()),
            DatePart::DayOfYear => i64::from(self.day_of_year()),
        }
    }
}

pub fn date_part(s: &str, part: DatePart) -> Result<i64, OpError> {
    CivilDate::parse(s).map(|d| d.part(part))
}

/// `days(a) - days(b)`.
pub fn date_diff_days(a: &str, b: &str) -> Result<i64, OpError> {
    Ok(CivilDate::parse(a)?.days_since_epoch() - CivilDate::parse(b)?.days_since_epoch())
}
