"""Segmentation scoring: pixel IoU and ranked average precision.

Walks through the precision/recall mechanics on a tiny detection
problem, then prints the aligned report table the evaluation commands
emit.
"""

import numpy as np

from streetlfe import Detection, EvalReport, ap50, availability, iou, mae

print("== pixel IoU ==")
a = np.zeros((6, 6), dtype=bool)
b = np.zeros((6, 6), dtype=bool)
a[1:3, 1:3] = True          # 2x2 block
b[1:3, 2:4] = True          # shifted by one column
print(f"overlapping blocks:  {iou(a, b):6.2f}%")
print(f"identical masks:     {iou(a, a):6.2f}%")
print(f"disjoint masks:      {iou(a, ~a):6.2f}%")

print()
print("== ranked detections -> AP50 ==")
gts = {"img": [(0, 0, 10, 10), (20, 20, 30, 30)]}
detections = [
    Detection("img", 0.9, box=(0, 0, 10, 10)),    # true positive
    Detection("img", 0.8, box=(50, 50, 60, 60)),  # false positive
    Detection("img", 0.7, box=(20, 20, 30, 30)),  # true positive
]
print("rank  score  outcome")
print("   1   0.90  TP  -> precision 1.00, recall 0.50")
print("   2   0.80  FP  -> precision 0.50, recall 0.50")
print("   3   0.70  TP  -> precision 0.67, recall 1.00")
print(f"interpolated AP50 = {ap50(detections, gts):.2f}%")

print()
print("== estimation metrics ==")
pairs = [(1.02, 1.00), (2.31, 2.20), (0.95, 1.10)]
print(f"MAE over {len(pairs)} properties: {mae(pairs):.4f} m")
print(f"availability 229 of 409: {availability(229, 409):.2f}%")

print()
print("== report table ==")
report = EvalReport(
    iou_pct=iou(a, b),
    ap50_pct=ap50(detections, gts),
    mae_m=mae(pairs),
    availability_pct=availability(229, 409),
    availability_visible_pct=availability(229, 232),
)
print(report.to_table())
