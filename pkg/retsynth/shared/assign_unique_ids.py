"""contains functions for assigning unique IDs to manifest rows"""

import hashlib


def assign_unique_ids(df, *fieldnames, id_column="image_id"):
    """assigns unique identifiers to each row in dataframe based on fields in fieldnames

    Args:
        df (pandas.DataFrame): dataframe to assign ids to
        *fieldnames: one or more column names to use to determine uniqueness
        id_column (str, optional): name of the id column. Defaults to "image_id".

    Raises:
        ValueError: if the fields do not identify rows uniquely

    Returns:
        pandas.DataFrame: dataframe with unique ids set, id column first
    """
    assert len(fieldnames) > 0, "You must provide at least one field"

    df = df.copy()
    if len(df) == 0:
        df[id_column] = []
    else:
        df[id_column] = df.apply(
            lambda row: hashlib.sha1(
                str.encode("-".join([str(row[fieldname]) for fieldname in fieldnames]))
            ).hexdigest()[:16],
            axis=1,
        )

    # put unique id first
    df = df[[id_column] + [c for c in df.columns if c != id_column]]

    found_rows = df[id_column].nunique()
    expected_rows = len(df)
    if found_rows != expected_rows:
        dupes = df[df[id_column].duplicated(keep=False)]
        raise ValueError(
            "assigning unique IDs did not result in fully unique IDs. "
            f"Found {found_rows} unique records, expected {expected_rows}. "
            f"Duplicated rows:\n{dupes.to_string()}"
        )

    return df
