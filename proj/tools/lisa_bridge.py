#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Serve a LISA checkpoint over the thinkfirst segmenter line protocol.

    -> SEGMENT <image_path> <base64(prompt)>
    <- MASK <mask_path>   |   ERROR <message>

Point --lisa-root at a checkout of the LISA repository and reference the
script from the config file:

    "segmenter": "lisa",
    "lisa": {"command": ["python3", "tools/lisa_bridge.py", "--lisa-root", "/opt/LISA"]}
"""

import argparse
import base64
import os
import sys
import tempfile
import traceback

PIXEL_MEAN = (123.675, 116.28, 103.53)
PIXEL_STD = (58.395, 57.12, 57.375)
IMG_SIZE = 1024


def parse_args():
    p = argparse.ArgumentParser()
    p.add_argument("--lisa-root", default=os.environ.get("LISA_ROOT", "."))
    p.add_argument("--version", default="xinlai/LISA-13B-llama2-v1")
    p.add_argument("--vision-tower", default="openai/clip-vit-large-patch14")
    p.add_argument("--precision", default="fp16", choices=["fp16", "bf16", "fp32"])
    p.add_argument("--load-in-8bit", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--max-new-tokens", type=int, default=512)
    p.add_argument("--mask-dir", default=None)
    return p.parse_args()


class Lisa:
    def __init__(self, args):
        sys.path.insert(0, os.path.abspath(args.lisa_root))
        import torch
        from transformers import AutoTokenizer, CLIPImageProcessor

        from model.LISA import LISAForCausalLM
        from model.segment_anything.utils.transforms import ResizeLongestSide

        self.torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(
            args.version, model_max_length=512, padding_side="right", use_fast=False
        )
        self.tokenizer.pad_token = self.tokenizer.unk_token
        seg_token_idx = self.tokenizer("[SEG]", add_special_tokens=False).input_ids[0]

        self.dtype = {"fp16": torch.half, "bf16": torch.bfloat16, "fp32": torch.float32}[args.precision]
        kwargs = {"torch_dtype": self.dtype}
        if args.load_in_8bit:
            from transformers import BitsAndBytesConfig

            kwargs.update(
                torch_dtype=torch.half,
                quantization_config=BitsAndBytesConfig(
                    load_in_8bit=True, llm_int8_skip_modules=["visual_model"]
                ),
            )

        model = LISAForCausalLM.from_pretrained(
            args.version,
            low_cpu_mem_usage=True,
            vision_tower=args.vision_tower,
            seg_token_idx=seg_token_idx,
            **kwargs,
        )
        model.config.eos_token_id = self.tokenizer.eos_token_id
        model.config.bos_token_id = self.tokenizer.bos_token_id
        model.config.pad_token_id = self.tokenizer.pad_token_id
        model.get_model().initialize_vision_modules(model.get_model().config)
        vision_tower = model.get_model().get_vision_tower()
        vision_tower.to(dtype=self.dtype)
        if not args.load_in_8bit:
            model = model.to(dtype=self.dtype).cuda()
        vision_tower.to(device="cuda")
        model.eval()

        self.model = model
        self.clip = CLIPImageProcessor.from_pretrained(model.config.vision_tower)
        self.transform = ResizeLongestSide(IMG_SIZE)
        self.max_new_tokens = args.max_new_tokens

    def _sam_input(self, image_np):
        torch = self.torch
        x = torch.from_numpy(image_np).permute(2, 0, 1).contiguous().float()
        mean = torch.tensor(PIXEL_MEAN).view(-1, 1, 1)
        std = torch.tensor(PIXEL_STD).view(-1, 1, 1)
        x = (x - mean) / std
        h, w = x.shape[-2:]
        return torch.nn.functional.pad(x, (0, IMG_SIZE - w, 0, IMG_SIZE - h))

    def segment(self, image_path, text):
        import cv2
        import numpy as np

        from model.llava import conversation as conversation_lib
        from model.llava.mm_utils import tokenizer_image_token
        from utils.utils import DEFAULT_IMAGE_TOKEN

        conv = conversation_lib.conv_templates["llava_v1"].copy()
        conv.messages = []
        conv.append_message(conv.roles[0], DEFAULT_IMAGE_TOKEN + "\n" + text)
        conv.append_message(conv.roles[1], "")
        prompt = conv.get_prompt()

        bgr = cv2.imread(image_path)
        if bgr is None:
            raise ValueError("cannot read " + image_path)
        image_np = cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
        original_size = [image_np.shape[:2]]

        image_clip = self.clip.preprocess(image_np, return_tensors="pt")["pixel_values"][0]
        image_clip = image_clip.unsqueeze(0).cuda().to(self.dtype)
        resized = self.transform.apply_image(image_np)
        resize_list = [resized.shape[:2]]
        image = self._sam_input(resized).unsqueeze(0).cuda().to(self.dtype)

        input_ids = tokenizer_image_token(prompt, self.tokenizer, return_tensors="pt").unsqueeze(0).cuda()
        with self.torch.inference_mode():
            _, pred_masks = self.model.evaluate(
                image_clip,
                image,
                input_ids,
                resize_list,
                original_size,
                max_new_tokens=self.max_new_tokens,
                tokenizer=self.tokenizer,
            )

        out = np.zeros(image_np.shape[:2], dtype=bool)
        for m in pred_masks:
            if m.shape[0] == 0:
                continue
            out |= m.detach().cpu().numpy()[0] > 0
        return out


def main():
    args = parse_args()
    mask_dir = args.mask_dir or tempfile.mkdtemp(prefix="lisa-masks-")
    os.makedirs(mask_dir, exist_ok=True)
    lisa = Lisa(args)

    import cv2
    import numpy as np

    counter = 0
    for line in sys.stdin:
        line = line.rstrip("\n")
        if not line:
            continue
        try:
            head, encoded = line.rsplit(" ", 1)
            verb, image_path = head.split(" ", 1)
            if verb != "SEGMENT":
                raise ValueError("unknown request " + verb)
            text = base64.b64decode(encoded).decode("utf-8")
            mask = lisa.segment(image_path, text)
            counter += 1
            path = os.path.join(mask_dir, "mask-%06d.png" % counter)
            cv2.imwrite(path, mask.astype(np.uint8) * 255)
            reply = "MASK " + path
        except Exception as exc:  # report and keep serving
            traceback.print_exc(file=sys.stderr)
            reply = "ERROR " + " ".join(str(exc).split())
        sys.stdout.write(reply + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
