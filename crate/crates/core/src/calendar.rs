//! Calendar months and business-day helpers.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Months, NaiveDate, Weekday};

use crate::error::{Error, Result};

/// A calendar month, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month {
    year: i32,
    month: u32,
}

impl Month {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidArgument(format!("month {month} out of range")));
        }
        Ok(Month { year, month })
    }

    pub fn of(date: NaiveDate) -> Self {
        Month {
            year: date.year(),
            month: date.month(),
        }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid month")
    }

    pub fn last_day(self) -> NaiveDate {
        self.first_day() + Months::new(1) - chrono::Days::new(1)
    }

    /// Month shifted by `delta` months (negative moves backwards).
    pub fn offset(self, delta: i32) -> Self {
        let index = self.index() + delta;
        Month {
            year: index.div_euclid(12),
            month: index.rem_euclid(12) as u32 + 1,
        }
    }

    pub fn succ(self) -> Self {
        self.offset(1)
    }

    /// Number of months from `self` to `other` (positive when `other` is later).
    pub fn months_until(self, other: Month) -> i32 {
        other.index() - self.index()
    }

    /// Inclusive range of months.
    pub fn range_inclusive(first: Month, last: Month) -> impl Iterator<Item = Month> {
        let n = first.months_until(last).max(-1) + 1;
        (0..n).map(move |k| first.offset(k))
    }

    fn index(self) -> i32 {
        self.year * 12 + self.month as i32 - 1
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Month {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected month as YYYY-MM, got {s:?}"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        Month::new(year, month)
    }
}

/// Converts an evaluation period in years to a whole number of calendar months.
pub fn delta_t_months(delta_t_years: f64) -> Result<u32> {
    let months = delta_t_years * 12.0;
    let rounded = months.round();
    if !delta_t_years.is_finite() || rounded < 1.0 || (months - rounded).abs() > 1e-9 {
        return Err(Error::InvalidDeltaT(delta_t_years));
    }
    Ok(rounded as u32)
}

pub fn is_business_day(date: NaiveDate) -> bool {
    !matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

/// `count` consecutive Monday-to-Friday dates starting at the first business day on or after `start`.
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut day = start;
    while out.len() < count {
        if is_business_day(day) {
            out.push(day);
        }
        day = day.succ_opt().expect("date in range");
    }
    out
}

/// Number of business days in `[start, end)`.
pub fn business_days_between(start: NaiveDate, end: NaiveDate) -> usize {
    let mut n = 0;
    let mut day = start;
    while day < end {
        if is_business_day(day) {
            n += 1;
        }
        day = day.succ_opt().expect("date in range");
    }
    n
}
