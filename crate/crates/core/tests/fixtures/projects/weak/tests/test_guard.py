from guard import check_quota, normalize_name


def test_quota_within_limit():
    check_quota(1, 5)


def test_normalize_name():
    assert normalize_name("  Ada ") == "ada"
