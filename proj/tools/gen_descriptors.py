"""Writes the descriptors under scenarios/ for the pipeline topology."""

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "scenarios"


def base(n_cams=3, extra_cams=0):
    comps=[{"id":"edge","kind":"host"},{"id":"cloud","kind":"host"},{"id":"recognizer","kind":"service"}]
    metrics=[]
    deps=[["cloud","recognizer"]]
    for i in range(1,n_cams+extra_cams+1):
        comps += [{"id":f"cam{i}","kind":"service"},{"id":f"md{i}","kind":"service"}]
        deps += [[f"cam{i}",f"md{i}"],["edge",f"md{i}"],[f"md{i}","recognizer"]]
        metrics += [{"name":"frame_rate","component":f"cam{i}","level":"application","unit":"fps"},
                    {"name":"detected_motions","component":f"md{i}","level":"application","unit":"frames"},
                    {"name":"response_time","component":f"md{i}","level":"application","unit":"s"}]
    for name,level,unit in [("detected_motions","application","frames"),("response_time","application","s"),
        ("frame_processing_time","application","s"),("queue_length","application","frames"),
        ("detection_accuracy","application","ratio"),("cpu_utilization","infrastructure","ratio"),
        ("replicas","infrastructure","pods")]:
        metrics.append({"name":name,"component":"recognizer","level":level,"unit":unit})
    return {"components":comps,"metrics":metrics,"slos":[],"actions":[],"dependencies":deps,"remediation":[]}
def dump(d, name):
    with open(OUT / name, "w") as f:
        json.dump(d, f, indent=2)
        f.write("\n")

# Overload: response-time SLO at twice the heavy base service time, frame-rate remediation.
d=base()
d["slos"]=[{"id":"response-time","metric":"response_time","component":"recognizer","op":"<=","threshold":0.7,"debounce_ticks":3}]
for i in range(1,4):
    d["actions"].append({"id":f"fps-cam{i}","level":"application","verb":"set_frame_rate","target":f"cam{i}","parameter":1.0,"priority":0,"cooldown_ticks":60})
for i in range(1,4):
    d["remediation"].append({"slo":"response-time","cause_component":f"md{i}","actions":[f"fps-cam{i}"]})
d["remediation"].append({"slo":"response-time","actions":["fps-cam1","fps-cam2","fps-cam3"]})
dump(d,"overload.descriptor.json")

# Scale-out: processing-time SLO with a replica ladder.
d=base(3,3)
d["slos"]=[{"id":"processing-time","metric":"frame_processing_time","component":"recognizer","op":"<=","threshold":2.0,"debounce_ticks":2}]
for i,n in enumerate((4,5,6)):
    d["actions"].append({"id":f"scale-{n}","level":"infrastructure","verb":"scale_replicas","target":"recognizer","parameter":n,"priority":i,"cooldown_ticks":60})
d["remediation"].append({"slo":"processing-time","actions":["scale-4","scale-5","scale-6"]})
dump(d,"scale_out.descriptor.json")

# Fault: CPU pressure doubles service time; switching to the light model recovers.
d=base()
d["slos"]=[{"id":"response-time","metric":"response_time","component":"recognizer","op":"<=","threshold":0.6,"debounce_ticks":3}]
d["actions"]=[{"id":"light-model","level":"application","verb":"switch_model","target":"recognizer","parameter":1,"priority":0,"cooldown_ticks":60},
              {"id":"scale-2","level":"infrastructure","verb":"scale_replicas","target":"recognizer","parameter":2,"priority":1,"cooldown_ticks":60}]
d["remediation"]=[{"slo":"response-time","actions":["light-model","scale-2"]}]
dump(d,"fault.descriptor.json")
