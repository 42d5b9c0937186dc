from paraview.simple import *

# Isosurface of a synthetic dataset, coloured by the scalar.
wavelet = Wavelet()
contour = Contour(Input=wavelet)
contour.ContourBy = ['POINTS', 'RTData']
contour.Isosurfaces = [157.0]

view = GetActiveViewOrCreate('RenderView')
display = Show(contour, view)
ColorBy(display, ('POINTS', 'RTData'))
view.ResetActiveCameraToNegativeZ()
ResetCamera()
Render()
SaveScreenshot('isosurface.png', view, ImageResolution=[800, 600])
