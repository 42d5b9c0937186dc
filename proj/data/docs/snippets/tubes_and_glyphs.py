from paraview.simple import *

# Streamlines rendered as tubes with cone glyphs for direction.
reader = OpenDataFile('mpas.vtp')
calc = Calculator(Input=reader)
calc.ResultArrayName = 'velocity_latlon'
calc.Function = 'velocity_X*iHat + velocity_Y*jHat'

tube = Tube(Input=calc)
tube.Radius = 0.05

glyph = Glyph(Input=calc, GlyphType='Cone')
glyph.GlyphType.Resolution = 10
glyph.ScaleFactor = 0.5

view = GetActiveViewOrCreate('RenderView')
tubeDisplay = Show(tube, view)
ColorBy(tubeDisplay, ('POINTS', 'velocity', 'Magnitude'))
tubeDisplay.Specular = 1.0
glyphDisplay = Show(glyph, view)
view.Background = [1.0, 1.0, 1.0]
Render()
SaveScreenshot('tubes.png', view, ImageResolution=[2294, 1440])
