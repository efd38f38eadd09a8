from django.db import models


class CellModel(models.TextChoices):
    CBC = "CBC", "Circumcircle-bounded cell"
    AAECC = "AAECC", "Average-area-equivalent circular cell"


class SummaryModel(models.TextChoices):
    CBC = "CBC", "CBC exact"
    CBC_APPROX = "CBC_APPROX", "CBC far-field"
    AAECC = "AAECC", "AAECC exact"
    AAECC_APPROX = "AAECC_APPROX", "AAECC far-field"


class Hypothesis(models.TextChoices):
    H0 = "H0", "Target absent"
    H1 = "H1", "Target present"


class Method(models.TextChoices):
    CHISQ = "CHISQ", "Chi-squared (exact)"
    CLT = "CLT", "Gaussian (central limit)"


class BinScale(models.TextChoices):
    LINEAR = "linear", "Linear"
    LOG = "log", "Logarithmic"
