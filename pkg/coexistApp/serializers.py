from rest_framework import serializers

from coexistApp.antenna import ArrayConfig, Pointing
from coexistApp.choices import BinScale, CellModel, Method
from coexistApp.config import CdfGrid, RocGrid, SearchGrid, Sweep
from coexistApp.detection import DetectionSetup
from coexistApp.simkit import SEED_MASK, McConfig
from coexistApp.stochgeom import Deployment


# ============================
# BASE
# ============================
class StrictSerializer(serializers.Serializer):
    """
    Validates one flat block of string values. Blank values become None for
    nullable fields, unknown keys are errors, and constructor errors of the
    target record are reported as non-field errors.
    """

    def to_internal_value(self, data):
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError({key: ["Unknown field."] for key in unknown})
        data = {
            key: None if value == "" and self.fields[key].allow_null else value
            for key, value in data.items()
        }
        return super().to_internal_value(data)

    def validate(self, attrs):
        try:
            self.build(attrs)
        except ValueError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs

    def build(self, attrs):
        raise NotImplementedError

    def create(self, validated_data):
        return self.build(validated_data)

    def update(self, instance, validated_data):
        raise NotImplementedError("config records are immutable")


class CommaSeparatedListField(serializers.ListField):
    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item.strip() for item in data.split(",") if item.strip()]
        return super().to_internal_value(data)

    def to_representation(self, data):
        return ", ".join(str(item) for item in super().to_representation(data))


# ============================
# DEPLOYMENT
# ============================
class DeploymentSerializer(StrictSerializer):
    lambda_bs = serializers.FloatField()
    r_exc = serializers.FloatField()
    h_bs = serializers.FloatField(min_value=0)
    h_rad = serializers.FloatField(min_value=0)
    p_bs = serializers.FloatField(min_value=0)
    k_users = serializers.IntegerField(min_value=1)
    alpha = serializers.FloatField()
    pl_ref = serializers.FloatField(allow_null=True)
    f_c = serializers.FloatField()
    bs_n_az = serializers.IntegerField(min_value=1)
    bs_n_el = serializers.IntegerField(min_value=1)
    rad_n_az = serializers.IntegerField(min_value=1)
    rad_n_el = serializers.IntegerField(min_value=1)
    theta_rad_deg = serializers.FloatField(min_value=-90, max_value=90)
    phi_rad_deg = serializers.FloatField(min_value=-90, max_value=90)

    def build(self, attrs):
        return Deployment(
            lambda_bs=attrs["lambda_bs"],
            r_exc=attrs["r_exc"],
            h_bs=attrs["h_bs"],
            h_rad=attrs["h_rad"],
            p_bs=attrs["p_bs"],
            k_users=attrs["k_users"],
            alpha=attrs["alpha"],
            pl_ref=attrs.get("pl_ref"),
            f_c=attrs["f_c"],
            bs_array=ArrayConfig(attrs["bs_n_az"], attrs["bs_n_el"]),
            rad_array=ArrayConfig(attrs["rad_n_az"], attrs["rad_n_el"]),
            rad_point=Pointing.from_degrees(attrs["theta_rad_deg"], attrs["phi_rad_deg"]),
        )


# ============================
# DETECTION
# ============================
class DetectionSerializer(StrictSerializer):
    n_samples = serializers.IntegerField(min_value=1)
    p_tar = serializers.FloatField(min_value=0)
    noise_w = serializers.FloatField(min_value=0)
    p_th = serializers.FloatField(min_value=0)

    def build(self, attrs):
        return DetectionSetup(**attrs)


# ============================
# MONTE CARLO
# ============================
class MonteCarloSerializer(StrictSerializer):
    trials = serializers.IntegerField(min_value=1)
    seed = serializers.IntegerField(min_value=0, max_value=SEED_MASK)
    cell_model = serializers.ChoiceField(choices=CellModel.choices)
    bins = serializers.IntegerField(min_value=2)
    exact_geometry = serializers.BooleanField()

    def build(self, attrs):
        return McConfig(**attrs)


# ============================
# EXPERIMENT GRIDS
# ============================
SWEEPABLE = tuple(DeploymentSerializer._declared_fields) + tuple(DetectionSerializer._declared_fields)


class SweepSerializer(StrictSerializer):
    parameter = serializers.ChoiceField(choices=[(name, name) for name in SWEEPABLE])
    values = CommaSeparatedListField(child=serializers.FloatField(), min_length=1)

    def build(self, attrs):
        return Sweep(attrs["parameter"], tuple(attrs["values"]))


class RocSerializer(StrictSerializer):
    p_th_min = serializers.FloatField()
    p_th_max = serializers.FloatField()
    points = serializers.IntegerField(min_value=2)
    methods = CommaSeparatedListField(child=serializers.ChoiceField(choices=Method.choices), min_length=1)

    def validate_p_th_min(self, value):
        if not value > 0:
            raise serializers.ValidationError("Thresholds are log-spaced; p_th_min must be positive.")
        return value

    def build(self, attrs):
        if not attrs["p_th_max"] > attrs["p_th_min"]:
            raise ValueError("p_th_max must exceed p_th_min")
        return RocGrid(attrs["p_th_min"], attrs["p_th_max"], attrs["points"], tuple(attrs["methods"]))


class SearchSerializer(StrictSerializer):
    pd_thr = CommaSeparatedListField(child=serializers.FloatField(min_value=0, max_value=1), min_length=1)
    pfa_thr = CommaSeparatedListField(child=serializers.FloatField(min_value=0, max_value=1), min_length=1)
    start = serializers.FloatField(min_value=0)
    stop = serializers.FloatField(min_value=0)
    step = serializers.FloatField()

    def validate_step(self, value):
        if not value > 0:
            raise serializers.ValidationError("Ensure this value is greater than 0.")
        return value

    def build(self, attrs):
        if attrs["stop"] < attrs["start"]:
            raise ValueError("stop must not be below start")
        return SearchGrid(
            tuple(attrs["pd_thr"]), tuple(attrs["pfa_thr"]), attrs["start"], attrs["stop"], attrs["step"]
        )


class CdfSerializer(StrictSerializer):
    points = serializers.IntegerField(min_value=2)
    scale = serializers.ChoiceField(choices=BinScale.choices)

    def build(self, attrs):
        return CdfGrid(attrs["points"], attrs["scale"])


BLOCK_SERIALIZERS = {
    "deployment": DeploymentSerializer,
    "detection": DetectionSerializer,
    "mc": MonteCarloSerializer,
    "sweep": SweepSerializer,
    "roc": RocSerializer,
    "search": SearchSerializer,
    "cdf": CdfSerializer,
}
