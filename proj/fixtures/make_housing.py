"""Regenerates housing.csv: a seeded synthetic 506-row, 14-column numeric
house-sales table used by tests and examples."""

import numpy as np

N = 506
rng = np.random.default_rng(20240506)

sqft = np.round(rng.lognormal(mean=7.45, sigma=0.35, size=N))
bedrooms = np.clip(np.round(sqft / 600 + rng.normal(0, 0.7, N)), 1, 7)
bathrooms = np.clip(np.round(2 * (bedrooms * 0.6 + rng.normal(0, 0.4, N))) / 2, 1, 5)
lot_sqft = np.round(sqft * rng.uniform(2.0, 6.0, N))
year_built = np.round(rng.uniform(1900, 2020, N))
garage_spaces = np.clip(np.round(rng.normal(1.5, 0.8, N)), 0, 4)
stories = np.clip(np.round(sqft / 1500 + rng.normal(0, 0.4, N)), 1, 3)
distance_km = np.round(rng.gamma(2.0, 6.0, N), 2)
school_rating = np.round(np.clip(rng.normal(6.5, 1.8, N) - 0.05 * distance_km, 1, 10), 1)
crime_rate = np.round(rng.gamma(1.5, 1.2, N) * np.exp(-distance_km / 30), 3)
tax_rate = np.round(rng.uniform(0.8, 2.4, N), 3)
hoa_fee = np.round(np.where(rng.random(N) < 0.35, rng.uniform(50, 600, N), 0.0))
days_on_market = np.round(rng.gamma(2.0, 18.0, N))
price = np.round(
    40000
    + 160 * sqft
    + 9000 * bathrooms
    + 12000 * school_rating
    - 2500 * distance_km
    - 8000 * crime_rate
    + 150 * (year_built - 1960)
    + rng.normal(0, 25000, N),
    -2,
)

columns = {
    "sqft": sqft, "price": price, "bedrooms": bedrooms, "bathrooms": bathrooms,
    "lot_sqft": lot_sqft, "year_built": year_built, "garage_spaces": garage_spaces,
    "stories": stories, "distance_km": distance_km, "school_rating": school_rating,
    "crime_rate": crime_rate, "tax_rate": tax_rate, "hoa_fee": hoa_fee,
    "days_on_market": days_on_market,
}


def fmt(v):
    return str(int(v)) if float(v).is_integer() else repr(float(v))


with open("housing.csv", "w") as out:
    out.write(",".join(columns) + "\n")
    for i in range(N):
        out.write(",".join(fmt(c[i]) for c in columns.values()) + "\n")
