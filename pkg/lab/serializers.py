import math
import numbers

from rest_framework import serializers

from common.exceptions import LabException
from hypotest import consts as hypotest_consts
from lab import consts
from lab.models import ResultRecord
from linalg.services import OperatorHelper
from linalg.utils import decode_matrix, encode_matrix


class ComplexMatrixField(serializers.Field):
    """Square complex matrix written as rows of [re, im] pairs."""

    default_error_messages = {
        "rows": "Expected a non-empty list of rows.",
        "row": "Row {row} must be a list of {width} [re, im] pairs.",
        "entry": "Entry ({row}, {col}) must be a pair of finite numbers.",
    }

    def to_internal_value(self, data):
        if not isinstance(data, list) or not data:
            self.fail("rows")

        width = len(data)
        for i, row in enumerate(data):
            if not isinstance(row, list) or len(row) != width:
                self.fail("row", row=i, width=width)
            for j, entry in enumerate(row):
                ok = (
                    isinstance(entry, list)
                    and len(entry) == 2
                    and all(isinstance(v, numbers.Real) and not isinstance(v, bool) and math.isfinite(v) for v in entry)
                )
                if not ok:
                    self.fail("entry", row=i, col=j)

        return decode_matrix(data)

    def to_representation(self, value):
        return encode_matrix(value)


class StateFileSerializer(serializers.Serializer):
    state = ComplexMatrixField()
    subnormalized = serializers.BooleanField(required=False, default=False)

    def validate(self, attrs):
        try:
            attrs["state"] = OperatorHelper.density(attrs["state"], subnormalized=attrs["subnormalized"])
        except LabException as exc:
            raise serializers.ValidationError({"state": str(exc)})
        return attrs


class PovmFileSerializer(serializers.Serializer):
    elements = serializers.ListField(child=ComplexMatrixField(), min_length=1)


class ChannelInputSerializer(serializers.Serializer):
    symbol = serializers.CharField(max_length=64)
    prob = serializers.FloatField(min_value=0.0, max_value=1.0)
    state = ComplexMatrixField()


class ChannelFileSerializer(serializers.Serializer):
    dim_b = serializers.IntegerField(min_value=1)
    inputs = ChannelInputSerializer(many=True, allow_empty=False)

    def validate(self, attrs):
        dim_b = attrs["dim_b"]
        symbols = [entry["symbol"] for entry in attrs["inputs"]]
        if len(set(symbols)) != len(symbols):
            raise serializers.ValidationError({"inputs": "Symbols must be distinct."})

        total = math.fsum(entry["prob"] for entry in attrs["inputs"])
        if abs(total - 1) > hypotest_consts.PRIOR_SUM_TOL:
            raise serializers.ValidationError({"inputs": f"prior sum is {total!r}, expected 1."})

        for entry in attrs["inputs"]:
            symbol = entry["symbol"]
            if entry["state"].shape[0] != dim_b:
                raise serializers.ValidationError(
                    {"inputs": f"state of symbol {symbol!r} is {entry['state'].shape[0]}-dimensional, dim_b is {dim_b}."}
                )
            try:
                entry["state"] = OperatorHelper.density(entry["state"], name=f"state of symbol {symbol!r}")
            except LabException as exc:
                raise serializers.ValidationError({"inputs": str(exc)})
        return attrs

    def to_representation(self, instance):
        channel, prior = instance
        return {
            "dim_b": channel.dim_b,
            "inputs": [
                {"symbol": x, "prob": float(p), "state": encode_matrix(channel.outputs[x])}
                for x, p in zip(channel.symbols, prior)
            ],
        }


class CodebookFileSerializer(serializers.Serializer):
    codewords = serializers.ListField(child=serializers.CharField(max_length=64), min_length=1)

    def validate_codewords(self, value):
        symbols = self.context.get("symbols")
        if symbols is not None:
            unknown = sorted({x for x in value if x not in symbols})
            if unknown:
                raise serializers.ValidationError(f"Codewords {unknown} are not channel symbols.")
        return value

    def to_representation(self, instance):
        return {"codewords": list(instance.codewords)}


class ResultRecordSerializer(serializers.ModelSerializer):
    seed = serializers.IntegerField(min_value=0, max_value=consts.UINT64_MAX)

    class Meta:
        model = ResultRecord
        fields = ["command", "parameters", "outputs", "seed", "tool_version", "wall_time_ms"]
